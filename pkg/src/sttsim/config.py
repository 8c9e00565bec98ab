"""System-level configuration for the near-field link simulator.

All quantities are SI unless a field name says otherwise (noise density is
dBm/Hz, the usual datasheet unit). Defaults reproduce the reference desk-scale
setup: 28 GHz carrier, two parallel 255-element half-wavelength ULAs 15 metres
apart, 20 dBm per side.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

SPEED_OF_LIGHT = 299792458.0


@dataclass
class SystemConfig:
    """Physical and protocol parameters of the point-to-point link.

    Attributes:
        carrier_freq: carrier frequency in Hz.
        bandwidth: signal bandwidth in Hz.
        n_bs_antennas: BS array size N.
        n_ue_antennas: UE array size M.
        antenna_spacing_bs: BS element spacing in metres (None -> lambda/2).
        antenna_spacing_ue: UE element spacing in metres (None -> lambda/2).
        link_distance: centre-to-centre BS-UE distance in metres.
        n_streams: number of spatial streams N_s.
        n_nlos_paths: number of single-bounce scatter paths L.
        scattering_loss: per-path linear power loss factor in (0, 1].
        tx_gain: transmit antenna power gain (linear).
        rx_gain: receive antenna power gain (linear).
        tx_power_bs: BS transmit power in watts.
        tx_power_ue: UE transmit power in watts.
        noise_density: noise power spectral density in dBm/Hz.
        absorption_coeff: molecular absorption coefficient in 1/m.
        speed_of_light: propagation speed in m/s.
        scatter_padding: extra x-extent in metres for the scatterer region
            beyond the array apertures.
        enforce_near_field: if True, reject geometries whose link distance
            reaches the Rayleigh (far-field) distance.
    """

    carrier_freq: float = 28e9
    bandwidth: float = 1e8
    n_bs_antennas: int = 255
    n_ue_antennas: int = 255
    antenna_spacing_bs: float | None = None
    antenna_spacing_ue: float | None = None
    link_distance: float = 15.0
    n_streams: int = 1
    n_nlos_paths: int = 3
    scattering_loss: float = 10.0 ** (-15.0 / 10.0)
    tx_gain: float = 10.0 ** 1.5
    rx_gain: float = 10.0 ** 0.5
    tx_power_bs: float = 0.1
    tx_power_ue: float = 0.1
    noise_density: float = -174.0
    absorption_coeff: float = 0.0
    speed_of_light: float = SPEED_OF_LIGHT
    scatter_padding: float = 4.0
    enforce_near_field: bool = True

    def __post_init__(self):
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.n_bs_antennas < 1 or self.n_ue_antennas < 1:
            raise ValueError("antenna counts must be at least 1")
        if self.link_distance <= 0:
            raise ValueError("link_distance must be positive")
        if self.n_streams < 1:
            raise ValueError("n_streams must be at least 1")
        if self.n_nlos_paths < 0:
            raise ValueError("n_nlos_paths must be nonnegative")
        if not 0 < self.scattering_loss <= 1:
            raise ValueError("scattering_loss must be in (0, 1]")
        if self.tx_gain <= 0 or self.rx_gain <= 0:
            raise ValueError("antenna gains must be positive")
        if self.tx_power_bs <= 0 or self.tx_power_ue <= 0:
            raise ValueError("transmit powers must be positive")
        if self.absorption_coeff < 0:
            raise ValueError("absorption_coeff must be nonnegative")
        if self.speed_of_light <= 0:
            raise ValueError("speed_of_light must be positive")
        if self.scatter_padding < 0:
            raise ValueError("scatter_padding must be nonnegative")

    @property
    def wavelength(self) -> float:
        return self.speed_of_light / self.carrier_freq

    @property
    def wavenumber(self) -> float:
        """Free-space wavenumber k0 = 2 pi / lambda."""
        import math

        return 2.0 * math.pi / self.wavelength

    def spacing_bs(self) -> float:
        return self.antenna_spacing_bs if self.antenna_spacing_bs is not None else self.wavelength / 2

    def spacing_ue(self) -> float:
        return self.antenna_spacing_ue if self.antenna_spacing_ue is not None else self.wavelength / 2

    def aperture_bs(self) -> float:
        return (self.n_bs_antennas - 1) * self.spacing_bs()

    def aperture_ue(self) -> float:
        return (self.n_ue_antennas - 1) * self.spacing_ue()


def config_from_dict(data: dict) -> SystemConfig:
    """Build a SystemConfig from a plain dict, rejecting unknown keys.

    Args:
        data: field-name -> value overrides on top of the defaults.

    Returns:
        A validated SystemConfig.

    Raises:
        ValueError: on unknown keys or invalid field values.
    """
    known = {f.name for f in dataclasses.fields(SystemConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown system config keys: {', '.join(unknown)}")
    return SystemConfig(**data)
