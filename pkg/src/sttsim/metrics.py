"""Link-quality metrics: rate, degrees of freedom, energy efficiency, and
spatial beam-gain maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import UlaGeometry, array_response


def spectral_efficiency(h: np.ndarray, s: np.ndarray, p: np.ndarray,
                        lam: np.ndarray, sigma2: float) -> float:
    """Achievable rate of a combiner/precoder pair with a fixed power split.

    Computes log2 det(I + C^-1 A Lam Lam^H A^H) with A = S^H H P and
    C = sigma2 * S^H S the post-combining noise covariance.

    Args:
        h: (M, N) channel.
        s: (M, N_s) combiner.
        p: (N, N_s) precoder.
        lam: per-stream amplitude allocation, 1-D diagonal entries or a
            diagonal matrix; stream power is its square.
        sigma2: per-antenna noise power in watts.

    Returns:
        Rate in bits/s/Hz.

    Raises:
        ValueError: if the combiner Gram matrix is singular (or sigma2 <= 0).
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    lam = np.asarray(lam)
    if lam.ndim == 1:
        lam = np.diag(lam)
    a = s.conj().T @ h @ p
    c = sigma2 * (s.conj().T @ s)
    sign_c, logdet_c = np.linalg.slogdet(c)
    if sign_c.real <= 0 or not np.isfinite(logdet_c):
        raise ValueError("combiner Gram matrix is singular")
    total = c + a @ lam @ lam.conj().T @ a.conj().T
    sign_t, logdet_t = np.linalg.slogdet(total)
    if sign_t.real <= 0:
        raise ValueError("rate matrix is singular")
    return float((logdet_t - logdet_c) / math.log(2.0))


def water_filling(gains: np.ndarray, total_power: float, sigma2: float
                  ) -> np.ndarray:
    """Optimal power split over parallel channels.

    Solves max sum log2(1 + g_i^2 lam_i^2 / sigma2) subject to
    sum lam_i^2 = total_power; the solution is lam_i^2 =
    max(0, mu - sigma2 / g_i^2) with the water level mu found by bisection.

    Args:
        gains: per-channel amplitude gains g_i (nonnegative).
        total_power: power budget (> 0).
        sigma2: noise power (>= 0).

    Returns:
        Diagonal amplitude matrix Lam with trace(Lam^2) = total_power.

    Raises:
        ValueError: on an empty or negative gain vector or bad budget.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 1 or gains.size == 0:
        raise ValueError("gains must be a nonempty vector")
    if np.any(gains < 0):
        raise ValueError("gains must be nonnegative")
    if not np.any(gains > 0):
        raise ValueError("at least one gain must be positive")
    if total_power <= 0:
        raise ValueError("total_power must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    floors = np.full(gains.shape, np.inf)
    active = gains > 0
    floors[active] = sigma2 / gains[active] ** 2

    def allocated(mu: float) -> np.ndarray:
        return np.maximum(0.0, mu - floors)

    lo = 0.0
    hi = total_power + float(np.min(floors)) + 1.0
    while np.sum(allocated(hi)) < total_power:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(allocated(mid)) < total_power:
            lo = mid
        else:
            hi = mid
    powers = allocated(0.5 * (lo + hi))
    scale = total_power / np.sum(powers) if np.sum(powers) > 0 else 0.0
    return np.diag(np.sqrt(powers * scale))


def edof(h: np.ndarray) -> float:
    """Effective degrees of freedom: trace(C)^2 / trace(C^2), C = H^H H."""
    fro2 = float(np.sum(np.abs(h) ** 2))
    if fro2 == 0:
        raise ValueError("channel is identically zero")
    c2 = float(np.sum(np.abs(h.conj().T @ h) ** 2))
    return fro2**2 / c2


@dataclass
class PowerModel:
    """Hardware power accounting for energy efficiency.

    Attributes:
        tx_power_bs, tx_power_ue: radiated powers in watts.
        n_rf_bs, n_rf_ue: RF chain counts.
        n_ps_bs, n_ps_ue: phase shifter counts.
        p_rf: power per RF chain (W).
        p_ps: power per phase shifter (W).
        p_bb: baseband power per side (W).
    """

    tx_power_bs: float
    tx_power_ue: float
    n_rf_bs: int
    n_rf_ue: int
    n_ps_bs: int
    n_ps_ue: int
    p_rf: float = 0.2
    p_ps: float = 0.03
    p_bb: float = 0.3

    def total_power(self) -> float:
        """Total consumed power in watts."""
        return (self.tx_power_bs + self.tx_power_ue
                + self.p_rf * (self.n_rf_bs + self.n_rf_ue)
                + 2.0 * self.p_bb
                + self.p_ps * (self.n_ps_bs + self.n_ps_ue))

    @classmethod
    def hybrid(cls, n_bs: int, n_ue: int, n_streams: int,
               tx_power_bs: float, tx_power_ue: float, **kwargs) -> "PowerModel":
        """Phase-shifter architecture: one RF chain per stream per side and
        a full antenna-by-stream shifter bank."""
        return cls(tx_power_bs=tx_power_bs, tx_power_ue=tx_power_ue,
                   n_rf_bs=n_streams, n_rf_ue=n_streams,
                   n_ps_bs=n_bs * n_streams, n_ps_ue=n_ue * n_streams,
                   **kwargs)

    @classmethod
    def fully_digital(cls, n_bs: int, n_ue: int,
                      tx_power_bs: float, tx_power_ue: float, **kwargs) -> "PowerModel":
        """One RF chain per antenna, no phase shifters."""
        return cls(tx_power_bs=tx_power_bs, tx_power_ue=tx_power_ue,
                   n_rf_bs=n_bs, n_rf_ue=n_ue, n_ps_bs=0, n_ps_ue=0,
                   **kwargs)


def energy_efficiency(rate: float, power_model: PowerModel) -> float:
    """Rate per consumed watt: rate / total power, in bits/s/Hz/W."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    return rate / power_model.total_power()


def beamformer_rate(h: np.ndarray, s: np.ndarray, p: np.ndarray,
                    sigma2: float, total_power: float) -> float:
    """Water-filled rate of a combiner/precoder pair.

    Whitens the post-combining noise (eigen-decomposition of S^H S with
    small-eigenvalue clipping), water-fills the power budget over the
    singular modes of the whitened effective channel, and returns the
    resulting rate. For orthonormal S and P this is the exact optimal-power
    rate of the pair; it is the common yardstick used to compare training
    methods.

    Args:
        h: (M, N) channel.
        s: (M, N_s) combiner (nonzero columns).
        p: (N, N_s) precoder.
        sigma2: per-antenna noise power.
        total_power: transmit power budget.

    Returns:
        Rate in bits/s/Hz.
    """
    s = np.atleast_2d(s.T).T if s.ndim == 1 else s
    p = np.atleast_2d(p.T).T if p.ndim == 1 else p
    c = s.conj().T @ s
    ew, ev = np.linalg.eigh(c)
    clip = 1e-14 * float(np.max(ew))
    ew = np.maximum(ew, clip)
    whiten = ev @ np.diag(ew**-0.5) @ ev.conj().T / math.sqrt(sigma2)
    g = whiten @ s.conj().T @ h @ p
    sv = np.linalg.svd(g, compute_uv=False)
    lam = water_filling(sv, total_power, 1.0)
    powers = np.diag(lam) ** 2
    rate = float(np.sum(np.log2(1.0 + sv**2 * powers)))
    return rate


def oracle_rate(h: np.ndarray, n_streams: int, sigma2: float,
                total_power: float) -> float:
    """Water-filled rate over the top singular modes of the channel itself
    (the fully digital optimum for a given stream count)."""
    sv = np.linalg.svd(h, compute_uv=False)[:n_streams]
    lam = water_filling(sv, total_power, sigma2)
    powers = np.diag(lam) ** 2
    return float(np.sum(np.log2(1.0 + sv**2 * powers / sigma2)))


def beam_gain_map(beam: np.ndarray, geom: UlaGeometry, points: np.ndarray,
                  k0: float) -> np.ndarray:
    """Normalized spatial response of a beam over sample points.

    Evaluates |beam^H a(q)|^2 at each point q (receive convention; pass the
    conjugate of a transmit beam) and normalizes by the map maximum.

    Args:
        beam: (antennas,) complex beam.
        geom: array geometry the beam lives on.
        points: (..., 3) sample coordinates.
        k0: free-space wavenumber.

    Returns:
        Real array with the leading shape of `points`, max value 1.
    """
    points = np.asarray(points, dtype=float)
    if points.shape[-1] != 3:
        raise ValueError("points must have a trailing dimension of 3")
    flat = points.reshape(-1, 3)
    gains = np.empty(flat.shape[0])
    for i, q in enumerate(flat):
        a = array_response(geom, q, k0)
        gains[i] = np.abs(np.vdot(beam, a)) ** 2
    peak = gains.max()
    if peak == 0:
        raise ValueError("beam has zero response everywhere on the grid")
    return (gains / peak).reshape(points.shape[:-1])
