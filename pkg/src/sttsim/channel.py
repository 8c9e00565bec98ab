"""Near-field channel synthesis for parallel uniform linear arrays.

Arrays live in the xz plane: elements along the x axis, boresight along z.
Channel entries follow the uniform-spherical-wave model: a common complex
amplitude times exp(-j k0 r) with r the exact element-to-element distance, so
the phase front carries the full spherical curvature rather than a planar
approximation. Scatter paths are single-bounce outer products of the two
array responses at the scatter point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


@dataclass
class UlaGeometry:
    """A uniform linear array placed in 3-D space.

    Attributes:
        positions: (count, 3) element coordinates in metres.
        spacing: element spacing in metres.
        center: (3,) array centre.
        axis: (3,) unit vector along the array.
        aperture: physical aperture (count - 1) * spacing.
    """

    positions: np.ndarray
    spacing: float
    center: np.ndarray
    axis: np.ndarray
    aperture: float

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass
class ScattererSet:
    """Single-bounce scatter points and their complex path amplitudes."""

    points: np.ndarray
    gains: np.ndarray


@dataclass
class ChannelMatrix:
    """A synthesized channel with its line-of-sight/scatter decomposition.

    Attributes:
        matrix: (M, N) total channel, UE rows, BS columns.
        los: (M, N) line-of-sight part.
        nlos: (M, N) scatter part.
        gain: complex amplitude of the central line-of-sight link; every
            entry of `los` has magnitude abs(gain).
    """

    matrix: np.ndarray
    los: np.ndarray
    nlos: np.ndarray
    gain: complex


def build_ula(count: int, spacing: float, center, axis) -> UlaGeometry:
    """Place a centred uniform linear array.

    Args:
        count: number of elements (>= 1).
        spacing: element spacing in metres (> 0).
        center: (3,) centre position.
        axis: (3,) unit vector along the array.

    Returns:
        UlaGeometry with elements at center + spacing * k * axis for
        k = -(count-1)/2 .. (count-1)/2.

    Raises:
        ValueError: if count < 1, spacing <= 0, or axis is not a 3-D unit
            vector.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    center = np.asarray(center, dtype=float)
    axis = np.asarray(axis, dtype=float)
    if center.shape != (3,) or axis.shape != (3,):
        raise ValueError("center and axis must be 3-D vectors")
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError("axis must be a unit vector")
    offsets = np.arange(count, dtype=float) - (count - 1) / 2.0
    positions = center[None, :] + offsets[:, None] * spacing * axis[None, :]
    return UlaGeometry(
        positions=positions,
        spacing=float(spacing),
        center=center,
        axis=axis,
        aperture=float((count - 1) * spacing),
    )


def rayleigh_distance(aperture_sum: float, wavelength: float) -> float:
    """Far-field boundary 2 * aperture_sum**2 / wavelength in metres."""
    if aperture_sum < 0:
        raise ValueError("aperture_sum must be nonnegative")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return 2.0 * aperture_sum**2 / wavelength


def pathloss(freq: float, dist: float, absorption: float = 0.0,
             c: float = 299792458.0) -> float:
    """Free-space power pathloss (4 pi f d / c)**2 * exp(absorption * d).

    Args:
        freq: carrier frequency in Hz.
        dist: propagation distance in metres.
        absorption: molecular absorption coefficient in 1/m.
        c: propagation speed in m/s.

    Returns:
        Linear power loss (dimensionless, >= 0).
    """
    if freq <= 0 or dist <= 0:
        raise ValueError("freq and dist must be positive")
    if absorption < 0:
        raise ValueError("absorption must be nonnegative")
    return (4.0 * math.pi * freq * dist / c) ** 2 * math.exp(absorption * dist)


def channel_gain(cfg: SystemConfig, dist: float, scatter_loss: float = 1.0) -> float:
    """Linear power gain of one propagation path.

    Combines antenna gains, free-space pathloss at `dist`, and an optional
    scatter power loss. The field amplitude that multiplies the phase terms
    of the channel is the square root of this value.

    Args:
        cfg: system configuration (gains, frequency, absorption).
        dist: total path length in metres.
        scatter_loss: linear power loss of the scatter event (1 for LoS).

    Returns:
        Linear power gain (dimensionless).
    """
    if not 0 < scatter_loss <= 1:
        raise ValueError("scatter_loss must be in (0, 1]")
    zeta = pathloss(cfg.carrier_freq, dist, cfg.absorption_coeff, cfg.speed_of_light)
    return scatter_loss * cfg.tx_gain * cfg.rx_gain / zeta


def array_response(geom: UlaGeometry, point, k0: float) -> np.ndarray:
    """Spherical-wave response of the array toward a point source.

    Args:
        geom: the array.
        point: (3,) source position in metres.
        k0: free-space wavenumber 2 pi / lambda.

    Returns:
        (count,) complex vector with entries exp(-j k0 ||point - r_n||);
        every entry has unit modulus.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (3,):
        raise ValueError("point must be a 3-D vector")
    dists = np.linalg.norm(geom.positions - point[None, :], axis=1)
    if np.any(dists <= 0):
        raise ValueError("point coincides with an array element")
    return np.exp(-1j * k0 * dists)


def sample_scatterers(cfg: SystemConfig, bs: UlaGeometry, ue: UlaGeometry,
                      rng: np.random.Generator) -> ScattererSet:
    """Draw single-bounce scatter points between the two arrays.

    Points are uniform in the axis-aligned box spanning both apertures in x
    (widened by cfg.scatter_padding on each side) and the open interval
    between the array centres in z, at y = 0. Each path amplitude is the
    square root of channel_gain evaluated at the total path length
    ||q - bs.center|| + ||q - ue.center|| with the configured scattering
    loss, times a random phase.

    Args:
        cfg: system configuration.
        bs: BS array geometry.
        ue: UE array geometry.
        rng: random generator for positions and phases.

    Returns:
        ScattererSet with cfg.n_nlos_paths entries (possibly zero).
    """
    count = cfg.n_nlos_paths
    xs = np.concatenate([bs.positions[:, 0], ue.positions[:, 0]])
    x_lo = float(xs.min()) - cfg.scatter_padding
    x_hi = float(xs.max()) + cfg.scatter_padding
    z_lo = float(min(bs.center[2], ue.center[2]))
    z_hi = float(max(bs.center[2], ue.center[2]))
    if count == 0:
        return ScattererSet(points=np.zeros((0, 3)), gains=np.zeros(0, dtype=complex))
    points = np.zeros((count, 3))
    points[:, 0] = rng.uniform(x_lo, x_hi, size=count)
    points[:, 2] = rng.uniform(z_lo, z_hi, size=count)
    lengths = (np.linalg.norm(points - bs.center[None, :], axis=1)
               + np.linalg.norm(points - ue.center[None, :], axis=1))
    amps = np.array([
        math.sqrt(channel_gain(cfg, r, cfg.scattering_loss)) for r in lengths
    ])
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=count))
    return ScattererSet(points=points, gains=amps * phases)


def los_channel(cfg: SystemConfig, bs: UlaGeometry, ue: UlaGeometry) -> np.ndarray:
    """Line-of-sight spherical-wave channel.

    Entry (m, n) is beta * exp(-j k0 ||r_m - x_n||) with r_m a UE element,
    x_n a BS element, and beta the common amplitude
    sqrt(channel_gain(cfg, link distance)).

    Returns:
        (M, N) complex matrix.
    """
    dist = float(np.linalg.norm(ue.center - bs.center))
    if dist <= 0:
        raise ValueError("array centres coincide")
    beta = math.sqrt(channel_gain(cfg, dist))
    diff = ue.positions[:, None, :] - bs.positions[None, :, :]
    dists = np.linalg.norm(diff, axis=2)
    return beta * np.exp(-1j * cfg.wavenumber * dists)


def nlos_channel(cfg: SystemConfig, bs: UlaGeometry, ue: UlaGeometry,
                 scatterers: ScattererSet) -> np.ndarray:
    """Single-bounce scatter channel: sum of beta_l * outer(b_ue, b_bs).

    Returns:
        (M, N) complex matrix (zero if there are no scatterers).
    """
    k0 = cfg.wavenumber
    out = np.zeros((ue.count, bs.count), dtype=complex)
    for point, gain in zip(scatterers.points, scatterers.gains):
        b_ue = array_response(ue, point, k0)
        b_bs = array_response(bs, point, k0)
        out += gain * np.outer(b_ue, b_bs)
    return out


def synthesize_channel(cfg: SystemConfig, bs: UlaGeometry, ue: UlaGeometry,
                       scatterers: ScattererSet) -> ChannelMatrix:
    """Total channel: line-of-sight plus scatter parts.

    Raises:
        ValueError: if cfg.enforce_near_field is set and the link distance
            reaches the Rayleigh distance of the combined apertures.
    """
    dist = float(np.linalg.norm(ue.center - bs.center))
    if cfg.enforce_near_field:
        bound = rayleigh_distance(bs.aperture + ue.aperture, cfg.wavelength)
        if dist >= bound:
            raise ValueError(
                f"link distance {dist:.3f} m is not in the near field "
                f"(Rayleigh distance {bound:.3f} m)")
    los = los_channel(cfg, bs, ue)
    nlos = nlos_channel(cfg, bs, ue, scatterers)
    beta = math.sqrt(channel_gain(cfg, dist))
    return ChannelMatrix(matrix=los + nlos, los=los, nlos=nlos, gain=complex(beta))


def noise_power(cfg: SystemConfig) -> float:
    """Receiver noise power in watts over the configured bandwidth."""
    return 10.0 ** (cfg.noise_density / 10.0) * 1e-3 * cfg.bandwidth


def standard_link(cfg: SystemConfig) -> tuple[UlaGeometry, UlaGeometry]:
    """Canonical placement: BS centred at the origin, UE on the z axis at
    the link distance, both arrays along +x."""
    bs = build_ula(cfg.n_bs_antennas, cfg.spacing_bs(), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    ue = build_ula(cfg.n_ue_antennas, cfg.spacing_ue(),
                   (0.0, 0.0, cfg.link_distance), (1.0, 0.0, 0.0))
    return bs, ue


def draw_channel(cfg: SystemConfig, rng: np.random.Generator
                 ) -> tuple[ChannelMatrix, UlaGeometry, UlaGeometry, ScattererSet]:
    """Build the canonical link and one random scatter realization."""
    bs, ue = standard_link(cfg)
    scat = sample_scatterers(cfg, bs, ue, rng)
    return synthesize_channel(cfg, bs, ue, scat), bs, ue, scat
