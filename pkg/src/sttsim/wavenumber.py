"""Wavenumber-domain transforms for linear apertures.

A discrete set of spatial frequencies j / D (j integer, |j| <= D / lambda)
spans the propagating field over an aperture of length D. The transform
matrices built here project antenna-domain vectors onto that nearly
orthonormal Fourier family, giving a compact image of a near-field channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import UlaGeometry


@dataclass
class WavenumberGrid:
    """Integer spatial-frequency indices for one aperture.

    Attributes:
        indices: 1-D int array, ceil(-D/lambda) .. floor(D/lambda) inclusive.
        aperture: aperture length D in metres.
        wavelength: carrier wavelength in metres.
    """

    indices: np.ndarray
    aperture: float
    wavelength: float

    @property
    def count(self) -> int:
        return self.indices.shape[0]


@dataclass
class Wtm:
    """Wavenumber transform matrix for one array.

    Attributes:
        matrix: (antennas, grid columns) complex matrix with columns
            exp(j 2 pi j x_n / D) / sqrt(columns).
        grid: the spatial-frequency grid of the columns.
        truncated_range: (i_min, i_max) grid-index bounds if this matrix was
            truncated, else None.
    """

    matrix: np.ndarray
    grid: WavenumberGrid
    truncated_range: tuple[int, int] | None = None

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]


def wavenumber_grid(aperture: float, wavelength: float) -> WavenumberGrid:
    """Integer frequency indices supported by an aperture.

    Args:
        aperture: aperture length D in metres (> 0).
        wavelength: carrier wavelength in metres (> 0).

    Returns:
        WavenumberGrid with indices ceil(-D/lambda) .. floor(D/lambda).
    """
    if aperture <= 0:
        raise ValueError("aperture must be positive")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    j_max = math.floor(aperture / wavelength)
    j_min = math.ceil(-aperture / wavelength)
    return WavenumberGrid(
        indices=np.arange(j_min, j_max + 1, dtype=int),
        aperture=float(aperture),
        wavelength=float(wavelength),
    )


def build_wtm(geom: UlaGeometry, grid: WavenumberGrid) -> Wtm:
    """Sampled Fourier family of an array over a frequency grid.

    Column j has entries exp(j 2 pi j * x_n / D) / sqrt(columns), where x_n
    is the element coordinate along the array axis measured from the array
    centre.

    Args:
        geom: the array (its aperture must match the grid's).
        grid: spatial-frequency grid.

    Returns:
        Wtm with near-orthonormal columns.

    Raises:
        ValueError: if the grid was built for a different aperture.
    """
    if abs(geom.aperture - grid.aperture) > 1e-9 * max(1.0, grid.aperture):
        raise ValueError(
            f"grid aperture {grid.aperture} does not match array aperture {geom.aperture}")
    coords = (geom.positions - geom.center[None, :]) @ geom.axis
    phase = 2.0 * math.pi * np.outer(coords / geom.aperture, grid.indices)
    matrix = np.exp(1j * phase) / math.sqrt(grid.count)
    return Wtm(matrix=matrix, grid=grid)


def to_wavenumber(h: np.ndarray, wtm_rx: Wtm, wtm_tx: Wtm) -> np.ndarray:
    """Project a channel onto the wavenumber domain.

    Computes Phi_rx^H @ h @ Phi_tx / sqrt(M N) with M, N the antenna counts.

    Args:
        h: (M, N) channel, receive rows.
        wtm_rx: receive-side transform (M rows).
        wtm_tx: transmit-side transform (N rows).

    Returns:
        (rx columns, tx columns) complex wavenumber image.
    """
    m, n = h.shape
    if wtm_rx.n_antennas != m or wtm_tx.n_antennas != n:
        raise ValueError("transform row counts do not match the channel shape")
    return wtm_rx.matrix.conj().T @ h @ wtm_tx.matrix / math.sqrt(m * n)


def from_wavenumber(ha: np.ndarray, wtm_rx: Wtm, wtm_tx: Wtm) -> np.ndarray:
    """Lift a wavenumber image back to the antenna domain.

    Computes sqrt(M N) * Phi_rx @ ha @ Phi_tx^H, the adjoint lift of
    to_wavenumber up to the M N normalization. The roundtrip
    from_wavenumber(to_wavenumber(h)) is the orthogonal projection of h onto
    the span of the two column families.
    """
    if wtm_rx.n_columns != ha.shape[0] or wtm_tx.n_columns != ha.shape[1]:
        raise ValueError("image shape does not match the transform columns")
    m, n = wtm_rx.n_antennas, wtm_tx.n_antennas
    return math.sqrt(m * n) * wtm_rx.matrix @ ha @ wtm_tx.matrix.conj().T


def truncate(wtm: Wtm, i_min: int, i_max: int) -> Wtm:
    """Keep only the columns with grid indices in [i_min, i_max].

    Args:
        wtm: transform to truncate.
        i_min: smallest grid index to keep.
        i_max: largest grid index to keep.

    Returns:
        Wtm holding the selected columns, with truncated_range set.

    Raises:
        ValueError: if the range is empty or outside the grid.
    """
    if i_min > i_max:
        raise ValueError("i_min must not exceed i_max")
    indices = wtm.grid.indices
    if i_min < indices[0] or i_max > indices[-1]:
        raise ValueError(
            f"range [{i_min}, {i_max}] outside grid [{indices[0]}, {indices[-1]}]")
    mask = (indices >= i_min) & (indices <= i_max)
    grid = replace(wtm.grid, indices=indices[mask])
    return Wtm(matrix=wtm.matrix[:, mask], grid=grid, truncated_range=(int(i_min), int(i_max)))
