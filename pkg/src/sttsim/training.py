"""Ping-pong pilot simulation and the online beam-training loops.

Single-beam training alternates one downlink and one uplink pilot per round;
each side takes one ascent step on its learner and transmits the refreshed
beam. Multi-beam training runs the same loop per beam, watches the relative
utility improvement on the UE side, and on convergence freezes the beam,
deflates both receive spaces so later beams are driven by the orthogonal
channel residual, and decays the learning rates.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelMatrix
from .learner import MlpLearner, decay_learning_rate, forward, grad_step, init_learner
from .metrics import beamformer_rate
from .sensing import SensingResult


@dataclass
class PingPongSim:
    """Stateful pilot channel shared by both link directions.

    Reciprocity: the uplink uses the transpose of the same channel matrix.

    Attributes:
        channel: the channel realization (ChannelMatrix or (M, N) array).
        noise_variance: per-entry receiver noise power in watts.
        tx_power_bs, tx_power_ue: pilot powers in watts.
        rng: noise generator owned by this simulator.
        round_counter: completed ping-pong rounds (increments on the
            downlink pilot).
    """

    channel: ChannelMatrix | np.ndarray
    noise_variance: float
    tx_power_bs: float
    tx_power_ue: float
    rng: np.random.Generator
    round_counter: int = 0

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.tx_power_bs <= 0 or self.tx_power_ue <= 0:
            raise ValueError("pilot powers must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return self.channel.matrix if isinstance(self.channel, ChannelMatrix) else self.channel


@dataclass
class TrainingConfig:
    """Knobs of the training stage.

    Attributes:
        rounds: total ping-pong training rounds T_a.
        convergence_tolerance: relative utility-improvement threshold that
            triggers a beam switch.
        decay: learning-rate factor applied at each beam switch.
        min_rounds_per_beam: rounds a beam must train before it may switch.
        fully_digital: use unit-2-norm beams instead of unit-modulus.
        n_streams: number of beams to train.
        reinit_per_beam: draw fresh learner parameters at each beam switch
            instead of warm-starting.
    """

    rounds: int = 125
    convergence_tolerance: float = 0.01
    decay: float = 0.99
    min_rounds_per_beam: int = 5
    fully_digital: bool = False
    n_streams: int = 1
    reinit_per_beam: bool = False

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.convergence_tolerance <= 0:
            raise ValueError("convergence_tolerance must be positive")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")
        if self.min_rounds_per_beam < 1:
            raise ValueError("min_rounds_per_beam must be at least 1")
        if self.n_streams < 1:
            raise ValueError("n_streams must be at least 1")


@dataclass
class BeamformerSet:
    """A trained combiner/precoder pair with its power allocation.

    Attributes:
        s: (M, N_s) UE-side combiner columns.
        p: (N, N_s) BS-side precoder columns.
        lam: (N_s, N_s) diagonal nonnegative amplitude allocation.
        constraint: 'hybrid' (unit-modulus entries) or 'fully_digital'
            (unit-norm columns).
    """

    s: np.ndarray
    p: np.ndarray
    lam: np.ndarray
    constraint: str

    @property
    def n_streams(self) -> int:
        return self.s.shape[1]


@dataclass
class TraceRow:
    """One training round: losses, utility, convergence ratio, rate."""

    t: int
    beam_index: int
    loss_dl: float
    loss_ul: float
    utility: float
    epsilon: float
    se_bits_per_hz: float


@dataclass
class TrainingTrace:
    """Round-by-round record of one training run.

    Attributes:
        rows: one entry per round plus an initialization snapshot (t = 0).
        switch_events: (round, old beam index, new beam index) tuples.
        pilot_rounds: ping-pong rounds consumed (equals the configured T_a).
    """

    rows: list[TraceRow] = field(default_factory=list)
    switch_events: list[tuple[int, int, int]] = field(default_factory=list)
    pilot_rounds: int = 0


def _crandn(rng: np.random.Generator, size: int, variance: float) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return rng.normal(0.0, scale, size) + 1j * rng.normal(0.0, scale, size)


def dl_pilot(sim: PingPongSim, p: np.ndarray, symbol_power: float) -> np.ndarray:
    """One downlink pilot: sqrt(power) * H @ p plus noise.

    Increments the simulator's round counter (the downlink transmission
    opens a ping-pong round).
    """
    if symbol_power <= 0:
        raise ValueError("symbol_power must be positive")
    sim.round_counter += 1
    h = sim.matrix
    return math.sqrt(symbol_power) * (h @ p) + _crandn(sim.rng, h.shape[0], sim.noise_variance)


def ul_pilot(sim: PingPongSim, s: np.ndarray, symbol_power: float) -> np.ndarray:
    """One uplink pilot: sqrt(power) * H^T @ conj(s) plus noise (the UE
    transmits with the conjugate beamformer)."""
    if symbol_power <= 0:
        raise ValueError("symbol_power must be positive")
    h = sim.matrix
    return math.sqrt(symbol_power) * (h.T @ s.conj()) + _crandn(sim.rng, h.shape[1], sim.noise_variance)


def deflate(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Remove a unit vector's span from a projector: R - v v^H.

    Args:
        r: square projector-like matrix.
        v: unit 2-norm vector (renormalized with a warning otherwise).

    Returns:
        The deflated matrix.
    """
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-9:
        warnings.warn("deflate received a non-unit vector; renormalizing")
        v = v / nrm
    return r - np.outer(v, v.conj())


def convergence_ratio(u_now: float, u_prev: float) -> float:
    """Relative utility improvement (u_now - u_prev) / u_now.

    Returns NaN when u_now <= 0 (undefined; callers treat it as not
    converged).
    """
    if u_now <= 0:
        return float("nan")
    return (u_now - u_prev) / u_now


def _zero_feed_beam(learner: MlpLearner, n_antennas: int, fully_digital: bool) -> np.ndarray:
    _, beam = forward(learner, np.zeros(n_antennas, dtype=complex), fully_digital)
    return beam


def _orthonormal_residual(r: np.ndarray, beam: np.ndarray) -> np.ndarray | None:
    """Component of a beam inside the residual space, normalized; None when
    the beam already lies in the deflated span."""
    v = r @ beam
    nrm = float(np.linalg.norm(v))
    if nrm < 1e-9:
        return None
    return v / nrm


def _snapshot_rate(h: np.ndarray, s_cols: np.ndarray, p_cols: np.ndarray,
                   sigma2: float, total_power: float) -> float:
    try:
        return beamformer_rate(h, s_cols, p_cols, sigma2, total_power)
    except (ValueError, np.linalg.LinAlgError):
        return float("nan")


def run_multi_beam(sim: PingPongSim, sres: SensingResult | None,
                   tcfg: TrainingConfig,
                   learners: tuple[MlpLearner, MlpLearner]
                   ) -> tuple[BeamformerSet, TrainingTrace]:
    """Train n_streams beams over a fixed round budget.

    All pilot power rides the active beam. The UE watches the relative
    improvement of its downlink utility; once it stays within the tolerance
    (after the per-beam minimum), the beam is frozen, both sides deflate
    their receive spaces by the orthonormalized beam components, learning
    rates decay, and training continues on the next beam from the very next
    round. Unfinished beams keep their last trained value.

    Args:
        sim: pilot simulator (owns channel, noise, and the round counter).
        sres: sensing result, used for stream-count validation (None skips
            it, for synthetic setups with hand-built learner bases).
        tcfg: training parameters.
        learners: (UE learner, BS learner).

    Returns:
        (BeamformerSet, TrainingTrace); the trace has tcfg.rounds + 1 rows.
    """
    ue, bs = learners
    h = sim.matrix
    m, n = h.shape
    n_streams = tcfg.n_streams
    if sres is not None:
        grid_limit = min(sres.wtm_ue.n_columns, sres.wtm_bs.n_columns)
        if n_streams > grid_limit:
            raise ValueError(
                f"n_streams {n_streams} exceeds the detected grid size {grid_limit}")
    fd = tcfg.fully_digital
    sigma2 = sim.noise_variance

    s_set = np.zeros((m, n_streams), dtype=complex)
    p_set = np.zeros((n, n_streams), dtype=complex)
    r_ue = np.eye(m, dtype=complex)
    r_bs = np.eye(n, dtype=complex)

    p_current = _zero_feed_beam(bs, n, fd)
    s_current = _zero_feed_beam(ue, m, fd)
    beam = 0
    s_set[:, 0] = s_current
    p_set[:, 0] = p_current

    trace = TrainingTrace(pilot_rounds=tcfg.rounds)
    trace.rows.append(TraceRow(
        t=0, beam_index=1, loss_dl=float("nan"), loss_ul=float("nan"),
        utility=float("nan"), epsilon=float("nan"),
        se_bits_per_hz=_snapshot_rate(h, s_set[:, :1], p_set[:, :1], sigma2,
                                      sim.tx_power_bs)))

    u_prev: float | None = None
    rounds_this_beam = 0
    for t in range(1, tcfg.rounds + 1):
        y_dl = dl_pilot(sim, p_current, sim.tx_power_bs)
        y_dl_defl = r_ue @ y_dl
        _, s_current = forward(ue, y_dl_defl, fd)
        loss_dl = grad_step(ue, y_dl_defl, side="dl", fully_digital=fd)

        y_ul = ul_pilot(sim, s_current, sim.tx_power_ue)
        y_ul_defl = r_bs @ y_ul
        _, p_next = forward(bs, y_ul_defl, fd)
        loss_ul = grad_step(bs, y_ul_defl, side="ul", fully_digital=fd)

        s_set[:, beam] = s_current
        p_set[:, beam] = p_next
        rounds_this_beam += 1

        utility = loss_dl**2
        epsilon = float("nan") if u_prev is None else convergence_ratio(utility, u_prev)
        u_prev = utility

        active = beam + 1
        trace.rows.append(TraceRow(
            t=t, beam_index=active, loss_dl=loss_dl, loss_ul=loss_ul,
            utility=utility, epsilon=epsilon,
            se_bits_per_hz=_snapshot_rate(h, s_set[:, :active], p_set[:, :active],
                                          sigma2, sim.tx_power_bs)))

        converged = (np.isfinite(epsilon)
                     and abs(epsilon) < tcfg.convergence_tolerance
                     and rounds_this_beam >= tcfg.min_rounds_per_beam)
        if converged and beam < n_streams - 1:
            v_s = _orthonormal_residual(r_ue, s_current)
            if v_s is None:
                warnings.warn("UE beam already spanned; skipping deflation")
            else:
                r_ue = deflate(r_ue, v_s)
            v_p = _orthonormal_residual(r_bs, p_next)
            if v_p is None:
                warnings.warn("BS beam already spanned; skipping deflation")
            else:
                r_bs = deflate(r_bs, v_p)
            decay_learning_rate(ue, tcfg.decay)
            decay_learning_rate(bs, tcfg.decay)
            if tcfg.reinit_per_beam:
                _reinit(ue, sim.rng)
                _reinit(bs, sim.rng)
            trace.switch_events.append((t, beam + 1, beam + 2))
            beam += 1
            u_prev = None
            rounds_this_beam = 0

        p_current = p_next

    lam = np.diag(np.full(n_streams, math.sqrt(sim.tx_power_bs / n_streams)))
    bset = BeamformerSet(s=s_set, p=p_set, lam=lam,
                         constraint="fully_digital" if fd else "hybrid")
    return bset, trace


def _reinit(learner: MlpLearner, rng: np.random.Generator):
    """Redraw parameters in place, keeping dims, basis, and learning rate."""
    fresh = init_learner(learner.layer_dims[0], learner.layer_dims[1:3],
                         learner.wtm_trunc, learner.learning_rate, rng)
    learner.weights = fresh.weights
    learner.biases = fresh.biases
    learner.m_w = fresh.m_w
    learner.v_w = fresh.v_w
    learner.m_b = fresh.m_b
    learner.v_b = fresh.v_b
    learner.step_count = 0


def run_single_beam(sim: PingPongSim, sres: SensingResult | None,
                    tcfg: TrainingConfig,
                    learners: tuple[MlpLearner, MlpLearner]
                    ) -> tuple[np.ndarray, np.ndarray, TrainingTrace]:
    """Train one beam pair; the single-stream case of run_multi_beam.

    Returns:
        (s, p, trace): final UE and BS beams and the round-by-round trace.
    """
    tcfg_single = dataclasses.replace(tcfg, n_streams=1)
    bset, trace = run_multi_beam(sim, sres, tcfg_single, learners)
    return bset.s[:, 0], bset.p[:, 0], trace


def trace_to_rows(trace: TrainingTrace, trial: int, phase: str = "train") -> list[dict]:
    """Flatten a trace into CSV-ready dicts with the standard columns."""
    return [
        {
            "trial": trial,
            "t": row.t,
            "phase": phase,
            "beam_index": row.beam_index,
            "loss_dl": row.loss_dl,
            "loss_ul": row.loss_ul,
            "utility": row.utility,
            "epsilon": row.epsilon,
            "se_bits_per_hz": row.se_bits_per_hz,
        }
        for row in trace.rows
    ]
