"""Online-trained beam mappings.

Each side of the link owns a small real MLP (two ReLU hidden layers, linear
output) that maps a received pilot vector, stacked into real and imaginary
parts, to coefficients over a beam-space basis (typically a truncated
wavenumber transform). The coefficient vector is lifted through the basis and
normalized into a transmit/receive beam; the training signal is the beam gain
against the latest pilot, maximized by Adam ascent. No dataset and no
codebook are involved: the network trains online, one pilot at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .wavenumber import Wtm

LR_FLOOR = 0.001
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class MlpLearner:
    """State of one online beam learner.

    Attributes:
        layer_dims: [input, hidden1, hidden2, output] widths; input is
            2 * antennas and output 2 * basis columns (stacked real/imag).
        weights, biases: per-layer parameters.
        m_w, v_w, m_b, v_b: Adam moment buffers mirroring the parameters.
        step_count: number of ascent steps taken.
        learning_rate: current Adam step size.
        wtm_trunc: beam-space basis, a truncated wavenumber transform or any
            (antennas, columns) complex matrix.
    """

    layer_dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step_count: int
    learning_rate: float
    wtm_trunc: Wtm | np.ndarray


@dataclass
class GradientReport:
    """Analytic-vs-numeric gradient comparison for one parameter set."""

    analytic: np.ndarray
    finite_difference: np.ndarray
    max_rel_error: float


def _basis_matrix(learner: MlpLearner) -> np.ndarray:
    basis = learner.wtm_trunc
    return basis.matrix if isinstance(basis, Wtm) else np.asarray(basis)


def init_learner(input_dim: int, hidden_dims, wtm_trunc, lr: float = 0.005,
                 rng: np.random.Generator | None = None) -> MlpLearner:
    """Create a learner with Glorot-uniform weights and zero biases.

    Args:
        input_dim: network input width (2 * antennas).
        hidden_dims: the two hidden-layer widths, e.g. (128, 64).
        wtm_trunc: beam-space basis (Wtm or complex matrix); the output
            width is 2 * its column count.
        lr: initial Adam learning rate.
        rng: generator for the weight draw.

    Returns:
        An MlpLearner with zeroed Adam state.
    """
    if rng is None:
        raise ValueError("rng is required for reproducible initialization")
    hidden_dims = tuple(int(d) for d in hidden_dims)
    if len(hidden_dims) != 2:
        raise ValueError("exactly two hidden layers are supported")
    basis = wtm_trunc.matrix if isinstance(wtm_trunc, Wtm) else np.asarray(wtm_trunc)
    if basis.ndim != 2:
        raise ValueError("wtm_trunc must be a matrix")
    output_dim = 2 * basis.shape[1]
    dims = [int(input_dim), *hidden_dims, output_dim]
    if any(d < 1 for d in dims):
        raise ValueError("all layer dims must be positive")
    if lr <= 0:
        raise ValueError("lr must be positive")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpLearner(
        layer_dims=dims,
        weights=weights,
        biases=biases,
        m_w=[np.zeros_like(w) for w in weights],
        v_w=[np.zeros_like(w) for w in weights],
        m_b=[np.zeros_like(b) for b in biases],
        v_b=[np.zeros_like(b) for b in biases],
        step_count=0,
        learning_rate=float(lr),
        wtm_trunc=wtm_trunc,
    )


def _forward_raw(learner: MlpLearner, y: np.ndarray):
    """Shared forward pass: returns (v, cache, beam_raw) with the degenerate
    zero entries of beam_raw already nudged to 1e-12."""
    basis = _basis_matrix(learner)
    y = np.asarray(y, dtype=complex)
    if y.shape != (basis.shape[0],):
        raise ValueError("received vector length must match the basis rows")
    v = np.concatenate([y.real, y.imag])
    if v.shape[0] != learner.layer_dims[0]:
        raise ValueError("stacked input length must match the network input width")
    w0, w1, w2 = learner.weights
    b0, b1, b2 = learner.biases
    h1, a1, h2, a2, o = _kernels.forward_mlp(w0, b0, w1, b1, w2, b2, v)
    k = basis.shape[1]
    sp = o[:k] + 1j * o[k:]
    beam_raw = basis @ sp
    beam_raw[beam_raw == 0] = 1e-12
    return v, (h1, a1, h2, a2), beam_raw


def _normalize(beam_raw: np.ndarray, fully_digital: bool) -> np.ndarray:
    if fully_digital:
        return beam_raw / np.linalg.norm(beam_raw)
    return beam_raw / np.abs(beam_raw) / math.sqrt(beam_raw.shape[0])


def forward(learner: MlpLearner, y: np.ndarray, fully_digital: bool = False
            ) -> tuple[np.ndarray, np.ndarray]:
    """Map a received pilot to a beam.

    Args:
        learner: the learner (parameters are not modified).
        y: complex received vector, one entry per antenna.
        fully_digital: if True normalize to unit 2-norm, else entrywise to
            modulus 1/sqrt(antennas).

    Returns:
        (beam_raw, beam): the basis lift of the network output (exact zeros
        nudged to 1e-12) and its normalized version. beam always has unit
        2-norm.
    """
    _, _, beam_raw = _forward_raw(learner, y)
    return beam_raw, _normalize(beam_raw, fully_digital)


def loss(beam_raw: np.ndarray, y: np.ndarray, scale: float | None = None,
         fully_digital: bool = False) -> float:
    """Beam-gain objective: modulus of the normalized beam against y.

    For the uplink variant (|p^T y|) pass the conjugated received vector.

    Args:
        beam_raw: unnormalized beam (no exact-zero entries).
        y: complex received vector.
        scale: constant-modulus scale (default 1/sqrt(len(beam_raw))); only
            used in the phase-only mode.
        fully_digital: if True use unit-2-norm normalization.

    Returns:
        Nonnegative gain value.
    """
    beam_raw = np.asarray(beam_raw, dtype=complex)
    if fully_digital:
        return float(np.abs(np.vdot(beam_raw, y)) / np.linalg.norm(beam_raw))
    if scale is None:
        scale = 1.0 / math.sqrt(beam_raw.shape[0])
    unit = beam_raw / np.abs(beam_raw)
    return float(scale * np.abs(np.vdot(unit, y)))


def _beam_gradient(beam_raw: np.ndarray, yy: np.ndarray, fully_digital: bool
                   ) -> tuple[float, np.ndarray]:
    """Loss value and its Wirtinger gradient with respect to beam_raw,
    with the convention dL = Re[g^H d(beam_raw)]."""
    n = beam_raw.shape[0]
    if fully_digital:
        nrm = np.linalg.norm(beam_raw)
        g = np.vdot(beam_raw, yy)
        value = float(np.abs(g) / nrm)
        phase = g / np.abs(g) if np.abs(g) > 0 else 1.0
        grad = np.conj(phase) * yy / nrm - (np.real(np.conj(phase) * g) / nrm**3) * beam_raw
        return value, grad
    scale = 1.0 / math.sqrt(n)
    zs = np.abs(beam_raw)
    unit = beam_raw / zs
    g = scale * np.vdot(unit, yy)
    value = float(np.abs(g))
    phase = g / np.abs(g) if np.abs(g) > 0 else 1.0
    c = np.conj(phase) * yy * (-1j) * np.conj(unit) * scale / zs
    grad = 1j * beam_raw * np.real(c)
    return value, grad


def _output_gradient(learner: MlpLearner, y: np.ndarray, side: str,
                     fully_digital: bool):
    """Forward pass plus the loss gradient at the network output."""
    if side not in ("dl", "ul"):
        raise ValueError("side must be 'dl' or 'ul'")
    basis = _basis_matrix(learner)
    v, cache, beam_raw = _forward_raw(learner, y)
    yy = np.conj(y) if side == "ul" else np.asarray(y, dtype=complex)
    value, grad_beam = _beam_gradient(beam_raw, yy, fully_digital)
    grad_sp = basis.conj().T @ grad_beam
    go = np.concatenate([grad_sp.real, grad_sp.imag])
    return v, cache, go, value


def grad_step(learner: MlpLearner, y: np.ndarray, side: str = "dl",
              fully_digital: bool = False) -> float:
    """One Adam ascent step on the beam-gain objective.

    The uplink side trains on |beam^T y| (the physical uplink gain), which
    is handled by conjugating y inside the loss; the network input is the
    raw received vector on both sides.

    Args:
        learner: updated in place.
        y: complex received pilot.
        side: 'dl' (UE learner) or 'ul' (BS learner).
        fully_digital: normalization mode (must match how the beam is used).

    Returns:
        The loss achieved by the pre-update parameters on this pilot.

    Raises:
        ValueError: on an invalid side or a non-finite gradient.
    """
    v, cache, go, value = _output_gradient(learner, y, side, fully_digital)
    if not np.all(np.isfinite(go)):
        raise ValueError("non-finite gradient; aborting this trial")
    learner.step_count += 1
    _kernels.adam_step(
        learner.weights, learner.biases, learner.m_w, learner.v_w,
        learner.m_b, learner.v_b, v, cache, go, learner.learning_rate,
        learner.step_count, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)
    return value


def decay_learning_rate(learner: MlpLearner, alpha: float,
                        floor: float = LR_FLOOR) -> MlpLearner:
    """Scale the learning rate by alpha, never below the floor."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    learner.learning_rate = max(floor, alpha * learner.learning_rate)
    return learner


def _full_gradient(learner: MlpLearner, y: np.ndarray, side: str,
                   fully_digital: bool) -> np.ndarray:
    """Flattened analytic gradient over all parameters (no update)."""
    v, cache, go, _ = _output_gradient(learner, y, side, fully_digital)
    h1, a1, h2, a2 = cache
    w1, w2 = learner.weights[1], learner.weights[2]
    ga2 = w2.T @ go
    gh2 = ga2 * (h2 > 0)
    ga1 = w1.T @ gh2
    gh1 = ga1 * (h1 > 0)
    parts = [np.outer(gh1, v), gh1, np.outer(gh2, a1), gh2, np.outer(go, a2), go]
    return np.concatenate([p.ravel() for p in parts])


def _loss_only(learner: MlpLearner, y: np.ndarray, side: str,
               fully_digital: bool) -> float:
    _, _, beam_raw = _forward_raw(learner, y)
    yy = np.conj(y) if side == "ul" else y
    value, _ = _beam_gradient(beam_raw, np.asarray(yy, dtype=complex), fully_digital)
    return value


def gradient_check(learner: MlpLearner, y: np.ndarray, side: str = "dl",
                   fully_digital: bool = False, step: float = 1e-5
                   ) -> GradientReport:
    """Compare the analytic gradient against central finite differences.

    Args:
        learner: parameters to check (restored afterwards).
        y: complex received pilot.
        side: 'dl' or 'ul'.
        fully_digital: normalization mode.
        step: finite-difference step.

    Returns:
        GradientReport; max_rel_error is the largest absolute deviation
        normalized by the largest gradient magnitude.
    """
    analytic = _full_gradient(learner, y, side, fully_digital)
    flats = []
    for w, b in zip(learner.weights, learner.biases):
        flats.append(w.ravel())
        flats.append(b.ravel())
    numeric = np.empty_like(analytic)
    pos = 0
    for flat in flats:
        for i in range(flat.shape[0]):
            saved = flat[i]
            flat[i] = saved + step
            up = _loss_only(learner, y, side, fully_digital)
            flat[i] = saved - step
            down = _loss_only(learner, y, side, fully_digital)
            flat[i] = saved
            numeric[pos] = (up - down) / (2.0 * step)
            pos += 1
    denom = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-300)
    max_rel = float(np.max(np.abs(analytic - numeric)) / denom)
    return GradientReport(analytic=analytic, finite_difference=numeric,
                          max_rel_error=max_rel)


def parameter_snapshot(learner: MlpLearner) -> dict:
    """JSON-serializable snapshot of the trainable parameters."""
    return {
        "version": 1,
        "layer_dims": list(learner.layer_dims),
        "weights": [w.tolist() for w in learner.weights],
        "biases": [b.tolist() for b in learner.biases],
        "learning_rate": learner.learning_rate,
        "step_count": learner.step_count,
    }


def restore_parameters(learner: MlpLearner, snapshot: dict) -> MlpLearner:
    """Load a snapshot produced by parameter_snapshot into a learner."""
    if snapshot.get("version") != 1:
        raise ValueError("unsupported snapshot version")
    if list(snapshot["layer_dims"]) != list(learner.layer_dims):
        raise ValueError("snapshot dims do not match the learner")
    learner.weights = [np.asarray(w, dtype=float) for w in snapshot["weights"]]
    learner.biases = [np.asarray(b, dtype=float) for b in snapshot["biases"]]
    learner.learning_rate = float(snapshot["learning_rate"])
    learner.step_count = int(snapshot["step_count"])
    return learner


def parameter_count(learner: MlpLearner) -> int:
    """Total number of trainable scalars."""
    return sum(w.size + b.size for w, b in zip(learner.weights, learner.biases))
