"""Wavenumber-domain channel-support sensing.

Both sides repeatedly exchange a fixed wide pilot beam; each received vector
is projected onto the wavenumber grid, the projections are averaged
coherently, and the occupied index range is read off by thresholding. The
detected ranges shrink the beam-search space from the full grid to the few
columns the channel actually excites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix, build_ula, noise_power
from .config import SystemConfig
from .wavenumber import Wtm, WavenumberGrid, build_wtm, truncate, wavenumber_grid


@dataclass
class SensingConfig:
    """Parameters of the sensing stage.

    Attributes:
        n_rounds: number of ping-pong pilot rounds T_s.
        pilot_bs: optional real/complex weights over the BS grid used to form
            the BS sensing beam (default: all ones).
        pilot_ue: same for the UE side.
        threshold_dl: boundary threshold fraction for the downlink (UE grid).
        threshold_ul: boundary threshold fraction for the uplink (BS grid).
    """

    n_rounds: int = 10
    pilot_bs: np.ndarray | None = None
    pilot_ue: np.ndarray | None = None
    threshold_dl: float = 0.1
    threshold_ul: float = 0.1

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be at least 1")
        for name in ("threshold_dl", "threshold_ul"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must be in (0, 1)")


@dataclass
class SensingResult:
    """Outcome of the sensing stage.

    Attributes:
        gains_ue: averaged wavenumber gain magnitudes over the UE grid.
        gains_bs: same over the BS grid.
        range_ue: detected (i_min, i_max) grid indices on the UE side.
        range_bs: detected (i_min, i_max) grid indices on the BS side.
        wtm_ue: UE transform truncated to range_ue.
        wtm_bs: BS transform truncated to range_bs.
        n_rounds: pilot rounds consumed.
    """

    gains_ue: np.ndarray
    gains_bs: np.ndarray
    range_ue: tuple[int, int]
    range_bs: tuple[int, int]
    wtm_ue: Wtm
    wtm_bs: Wtm
    n_rounds: int


def sensing_beam(wtm: Wtm, pilot: np.ndarray | None = None) -> np.ndarray:
    """Unit-norm constant-modulus beam spreading energy over a grid.

    The pilot weights are lifted through the transform, entries that are
    exactly zero are nudged to 1e-12, and the result is normalized entrywise
    to constant modulus 1/sqrt(antennas).

    Args:
        wtm: transform whose column span the beam should cover.
        pilot: weights over the grid columns (default all ones).

    Returns:
        (antennas,) complex beam with unit 2-norm.
    """
    if pilot is None:
        pilot = np.ones(wtm.n_columns)
    pilot = np.asarray(pilot)
    if pilot.shape != (wtm.n_columns,):
        raise ValueError("pilot length must match the grid size")
    z = wtm.matrix @ pilot.astype(complex)
    z[z == 0] = 1e-12
    return z / np.abs(z) / math.sqrt(wtm.n_antennas)


def wavenumber_gain(y: np.ndarray, wtm: Wtm) -> np.ndarray:
    """Project a received vector onto the wavenumber grid: Phi^H y."""
    if y.shape != (wtm.n_antennas,):
        raise ValueError("received vector length must match the array size")
    return wtm.matrix.conj().T @ y


def average_gains(gains: list[np.ndarray]) -> np.ndarray:
    """Magnitude of the coherent average of per-round gain vectors."""
    if len(gains) == 0:
        raise ValueError("gains must be nonempty")
    return np.abs(np.sum(gains, axis=0)) / len(gains)


def detect_boundaries(avg_gains: np.ndarray, grid: WavenumberGrid,
                      threshold_fraction: float) -> tuple[int, int]:
    """Smallest and largest grid indices whose gain clears the threshold.

    Args:
        avg_gains: nonnegative gains over the grid.
        grid: the grid the gains live on.
        threshold_fraction: fraction of the peak gain in (0, 1).

    Returns:
        (i_min, i_max) grid indices.

    Raises:
        ValueError: if the fraction is out of range or no gain clears it.
    """
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must be in (0, 1)")
    if avg_gains.shape != (grid.count,):
        raise ValueError("gain vector length must match the grid size")
    peak = np.max(avg_gains)
    mask = avg_gains > threshold_fraction * peak
    if not np.any(mask):
        raise ValueError("no gain exceeds the detection threshold")
    kept = grid.indices[mask]
    return int(kept.min()), int(kept.max())


def _crandn(rng: np.random.Generator, size: int, variance: float) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return rng.normal(0.0, scale, size) + 1j * rng.normal(0.0, scale, size)


def run_sensing(channel: ChannelMatrix | np.ndarray, cfg: SystemConfig,
                scfg: SensingConfig, rng: np.random.Generator) -> SensingResult:
    """Run the two-sided sensing stage on a channel realization.

    Each of the n_rounds rounds sends one downlink pilot (BS beam fixed, UE
    projects onto its grid) and one uplink pilot (UE beam fixed, BS
    projects). Averaged gains are thresholded into per-side index ranges and
    the transforms are truncated accordingly.

    Args:
        channel: (M, N) channel matrix or a ChannelMatrix.
        cfg: system configuration (canonical array geometry is assumed).
        scfg: sensing parameters.
        rng: noise generator.

    Returns:
        SensingResult with truncated transforms for both sides.
    """
    h = channel.matrix if isinstance(channel, ChannelMatrix) else np.asarray(channel)
    m, n = h.shape
    if (m, n) != (cfg.n_ue_antennas, cfg.n_bs_antennas):
        raise ValueError("channel shape does not match the configured array sizes")
    lam = cfg.wavelength
    grid_bs = wavenumber_grid((n - 1) * cfg.spacing_bs(), lam)
    grid_ue = wavenumber_grid((m - 1) * cfg.spacing_ue(), lam)
    bs_geom = build_ula(n, cfg.spacing_bs(), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    ue_geom = build_ula(m, cfg.spacing_ue(), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    wtm_bs = build_wtm(bs_geom, grid_bs)
    wtm_ue = build_wtm(ue_geom, grid_ue)

    p_beam = sensing_beam(wtm_bs, scfg.pilot_bs)
    s_beam = sensing_beam(wtm_ue, scfg.pilot_ue)
    sigma2 = noise_power(cfg)
    amp_dl = math.sqrt(cfg.tx_power_bs)
    amp_ul = math.sqrt(cfg.tx_power_ue)

    gains_dl = []
    gains_ul = []
    for _ in range(scfg.n_rounds):
        y_dl = amp_dl * (h @ p_beam) + _crandn(rng, m, sigma2)
        gains_dl.append(wavenumber_gain(y_dl, wtm_ue))
        y_ul = amp_ul * (h.T @ s_beam.conj()) + _crandn(rng, n, sigma2)
        gains_ul.append(wavenumber_gain(y_ul, wtm_bs))

    avg_ue = average_gains(gains_dl)
    avg_bs = average_gains(gains_ul)
    range_ue = detect_boundaries(avg_ue, grid_ue, scfg.threshold_dl)
    range_bs = detect_boundaries(avg_bs, grid_bs, scfg.threshold_ul)
    return SensingResult(
        gains_ue=avg_ue,
        gains_bs=avg_bs,
        range_ue=range_ue,
        range_bs=range_bs,
        wtm_ue=truncate(wtm_ue, *range_ue),
        wtm_bs=truncate(wtm_bs, *range_bs),
        n_rounds=scfg.n_rounds,
    )
