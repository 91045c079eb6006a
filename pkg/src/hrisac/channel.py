"""THz line-of-sight channel synthesis.

Everything here is deterministic given a :class:`Geometry` and
:class:`PropagationParams`; randomness only enters when a scenario samples
user placements.  Conventions:

* steering vectors are unit-norm with Kronecker structure
  ``(outer axis) x (inner axis)``, element phases ``exp(-j * gain * index)``;
* the BS array lives in the x-z plane, the RIS (reflecting and sensing
  elements) in the y-z plane;
* ``ChannelSet.ris_links`` stores one row per receiver, already conjugated,
  so that ``ris_links[k] @ Phi @ H @ w`` is the received scalar for user k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, SPEED_OF_LIGHT


@dataclass
class PropagationParams:
    """Carrier frequency (Hz), medium absorption (1/m) and propagation speed."""

    frequency_hz: float
    absorption_per_m: float = 0.0
    speed_of_light: float = SPEED_OF_LIGHT

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "PropagationParams":
        return cls(cfg.frequency_hz, cfg.absorption_per_m, cfg.speed_of_light)


@dataclass
class Geometry:
    """Array layout, element spacings (m), link angles (rad) and distances (m)."""

    bs_rows: int
    bs_cols: int
    ris_rows: int
    ris_cols: int
    sensing_rows: int
    sensing_cols: int
    bs_spacing_m: float
    ris_spacing_m: float
    spacing_y_m: float
    spacing_z_m: float
    wavelength_m: float
    ris_aoa_azimuth: float       # of the BS->RIS path, at the RIS
    ris_aoa_elevation: float
    bs_aod_azimuth: float        # of the BS->RIS path, at the BS
    bs_aod_elevation: float
    user_azimuths: np.ndarray    # (K,) departure angles at the RIS
    user_elevations: np.ndarray  # (K,)
    user_distances_m: np.ndarray  # (K,) RIS-to-user
    target_azimuth: float
    target_elevation: float
    target_distance_m: float
    bs_ris_distance_m: float

    @property
    def num_bs(self) -> int:
        return self.bs_rows * self.bs_cols

    @property
    def num_ris(self) -> int:
        return self.ris_rows * self.ris_cols

    @property
    def num_sensing(self) -> int:
        return self.sensing_rows * self.sensing_cols

    @property
    def num_users(self) -> int:
        return len(self.user_distances_m)

    def validate(self) -> None:
        counts = (self.bs_rows, self.bs_cols, self.ris_rows, self.ris_cols,
                  self.sensing_rows, self.sensing_cols)
        if any(c < 1 for c in counts):
            raise ValueError("axis counts must be >= 1")
        spacings = (self.bs_spacing_m, self.ris_spacing_m,
                    self.spacing_y_m, self.spacing_z_m, self.wavelength_m)
        if any(s <= 0 for s in spacings):
            raise ValueError("spacings and wavelength must be positive")
        dists = np.concatenate([self.user_distances_m,
                                [self.target_distance_m, self.bs_ris_distance_m]])
        if np.any(dists <= 0):
            raise ValueError("distances must be positive")
        elevations = np.concatenate([self.user_elevations,
                                     [self.ris_aoa_elevation, self.bs_aod_elevation,
                                      self.target_elevation]])
        if np.any(elevations <= 0) or np.any(elevations >= np.pi):
            raise ValueError("elevations must lie in (0, pi)")
        azimuths = np.concatenate([self.user_azimuths,
                                   [self.ris_aoa_azimuth, self.bs_aod_azimuth,
                                    self.target_azimuth]])
        if np.any(azimuths < 0) or np.any(azimuths >= 2 * np.pi):
            raise ValueError("azimuths must lie in [0, 2*pi)")


@dataclass
class ChannelSet:
    """Realized channels of one coherence block.

    ``bs_ris``   -- (N, M) rank-1 matrix from the BS to the RIS.
    ``ris_links`` -- (K+1, N); rows 0..K-1 are the conjugated RIS->user
    channels, row K is the conjugated RIS->target channel.
    """

    bs_ris: np.ndarray
    ris_links: np.ndarray

    @property
    def num_users(self) -> int:
        return self.ris_links.shape[0] - 1

    def user_row(self, k: int) -> np.ndarray:
        if not 0 <= k < self.num_users:
            raise IndexError(f"user index {k} out of range [0, {self.num_users})")
        return self.ris_links[k]

    @property
    def target_row(self) -> np.ndarray:
        return self.ris_links[-1]


def path_loss(frequency_hz: float, distance_m: float, absorption_per_m: float,
              speed_of_light: float = SPEED_OF_LIGHT) -> float:
    """Free-space spreading plus exponential medium absorption.

    ``(4 pi f d / C)^2 * exp(k d)``, strictly increasing in f, d and k.
    """
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    if absorption_per_m < 0:
        raise ValueError("absorption coefficient must be >= 0")
    spreading = (4.0 * np.pi * frequency_hz * distance_m / speed_of_light) ** 2
    return spreading * np.exp(absorption_per_m * distance_m)


def upa_steering(axis_counts: tuple[int, int],
                 phase_gains: tuple[float, float]) -> np.ndarray:
    """Unit-norm steering vector of an (n1, n2) planar array.

    ``phase_gains`` are the per-index phase increments (rad) along the two
    axes; the result is the Kronecker product of the two axis responses
    scaled by 1/sqrt(n1*n2).
    """
    n1, n2 = axis_counts
    if n1 < 1 or n2 < 1:
        raise ValueError("axis counts must be >= 1")
    p1, p2 = phase_gains
    a1 = np.exp(-1j * p1 * np.arange(n1))
    a2 = np.exp(-1j * p2 * np.arange(n2))
    return np.kron(a1, a2) / np.sqrt(n1 * n2)


def ris_arrival_vector(geom: Geometry) -> np.ndarray:
    """RIS response to the wave arriving from the BS, length N."""
    k0 = 2.0 * np.pi / geom.wavelength_m
    az, el = geom.ris_aoa_azimuth, geom.ris_aoa_elevation
    gain_y = k0 * np.sin(az) * np.sin(el) * geom.ris_spacing_m
    gain_z = k0 * np.cos(el) * geom.ris_spacing_m
    return upa_steering((geom.ris_rows, geom.ris_cols), (gain_y, gain_z))


def bs_departure_vector(geom: Geometry) -> np.ndarray:
    """BS response toward the RIS, length M.  x-z plane: cos(az)sin(el) on x."""
    k0 = 2.0 * np.pi / geom.wavelength_m
    az, el = geom.bs_aod_azimuth, geom.bs_aod_elevation
    gain_x = k0 * np.cos(az) * np.sin(el) * geom.bs_spacing_m
    gain_z = k0 * np.cos(el) * geom.bs_spacing_m
    return upa_steering((geom.bs_rows, geom.bs_cols), (gain_x, gain_z))


def ris_departure_vector(geom: Geometry, azimuth: float, elevation: float) -> np.ndarray:
    """Reflecting-element response toward (azimuth, elevation), length N."""
    k0 = 2.0 * np.pi / geom.wavelength_m
    gain_y = k0 * np.sin(azimuth) * np.sin(elevation) * geom.spacing_y_m
    gain_z = k0 * np.cos(elevation) * geom.spacing_z_m
    return upa_steering((geom.ris_rows, geom.ris_cols), (gain_y, gain_z))


def sensing_arrival_vector(geom: Geometry, azimuth: float, elevation: float) -> np.ndarray:
    """Sensing-element response to the echo from (azimuth, elevation), length N_s."""
    k0 = 2.0 * np.pi / geom.wavelength_m
    gain_y = k0 * np.sin(azimuth) * np.sin(elevation) * geom.spacing_y_m
    gain_z = k0 * np.cos(elevation) * geom.spacing_z_m
    return upa_steering((geom.sensing_rows, geom.sensing_cols), (gain_y, gain_z))


def bs_ris_channel(geom: Geometry, prop: PropagationParams) -> np.ndarray:
    """Rank-1 (N, M) BS->RIS matrix with squared Frobenius norm NM/PL."""
    pl = path_loss(prop.frequency_hz, geom.bs_ris_distance_m,
                   prop.absorption_per_m, prop.speed_of_light)
    n, m = geom.num_ris, geom.num_bs
    arrive = ris_arrival_vector(geom)
    depart = bs_departure_vector(geom)
    return np.sqrt(n * m / pl) * np.outer(arrive, depart.conj())


def ris_user_channels(geom: Geometry, prop: PropagationParams) -> np.ndarray:
    """(K+1, N) conjugated RIS->user rows plus the RIS->target row.

    Row k has squared norm N/PL(f, d_k).
    """
    n = geom.num_ris
    rows = []
    for k in range(geom.num_users):
        pl = path_loss(prop.frequency_hz, float(geom.user_distances_m[k]),
                       prop.absorption_per_m, prop.speed_of_light)
        beta = ris_departure_vector(geom, float(geom.user_azimuths[k]),
                                    float(geom.user_elevations[k]))
        rows.append(np.sqrt(n / pl) * beta.conj())
    pl_t = path_loss(prop.frequency_hz, geom.target_distance_m,
                     prop.absorption_per_m, prop.speed_of_light)
    beta_t = ris_departure_vector(geom, geom.target_azimuth, geom.target_elevation)
    rows.append(np.sqrt(n / pl_t) * beta_t.conj())
    return np.stack(rows)


def build_channels(geom: Geometry, prop: PropagationParams) -> ChannelSet:
    return ChannelSet(bs_ris=bs_ris_channel(geom, prop),
                      ris_links=ris_user_channels(geom, prop))


def build_geometry(cfg: ExperimentConfig, rng: np.random.Generator) -> Geometry:
    """Sample the default scenario geometry.

    User azimuths are spread evenly over the configured arc and elevations
    are fixed; only the RIS-to-user distances are random (seeded rng).
    """
    k = cfg.num_users
    if k == 1:
        azimuths = np.array([(cfg.user_azimuth_min + cfg.user_azimuth_max) / 2.0])
    else:
        azimuths = np.linspace(cfg.user_azimuth_min, cfg.user_azimuth_max, k)
    distances = rng.uniform(cfg.user_distance_min_m, cfg.user_distance_max_m, size=k)
    spacing = cfg.element_spacing_m
    geom = Geometry(
        bs_rows=cfg.bs_rows, bs_cols=cfg.bs_cols,
        ris_rows=cfg.ris_rows, ris_cols=cfg.ris_cols,
        sensing_rows=cfg.sensing_rows, sensing_cols=cfg.sensing_cols,
        bs_spacing_m=spacing, ris_spacing_m=spacing,
        spacing_y_m=spacing, spacing_z_m=spacing,
        wavelength_m=cfg.wavelength_m,
        ris_aoa_azimuth=cfg.bs_ris_aoa_azimuth,
        ris_aoa_elevation=cfg.bs_ris_aoa_elevation,
        bs_aod_azimuth=cfg.bs_ris_aod_azimuth,
        bs_aod_elevation=cfg.bs_ris_aod_elevation,
        user_azimuths=azimuths,
        user_elevations=np.full(k, cfg.user_elevation),
        user_distances_m=distances,
        target_azimuth=cfg.target_azimuth,
        target_elevation=cfg.target_elevation,
        target_distance_m=cfg.target_distance_m,
        bs_ris_distance_m=cfg.bs_ris_distance_m,
    )
    geom.validate()
    return geom
