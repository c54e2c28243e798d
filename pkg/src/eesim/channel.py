"""Narrow-band clustered mmWave MIMO channel with half-wavelength ULAs."""
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array along the x-axis."""

    num_elements: int
    spacing: float = 0.5  # wavelengths

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("num_elements must be >= 1")
        if self.spacing != 0.5:
            raise ValueError("only half-wavelength spacing is modelled")

    def response(self, elevation, azimuth):
        return steering_vector(self.num_elements, elevation, azimuth)


@dataclass(frozen=True)
class PathParams:
    gain: complex
    aod_elevation: float
    aod_azimuth: float
    aoa_elevation: float
    aoa_azimuth: float


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray  # (n_r, n_t)
    paths: list = field(default_factory=list)

    @property
    def n_r(self):
        return self.h.shape[0]

    @property
    def n_t(self):
        return self.h.shape[1]


def steering_vector(n, elevation, azimuth):
    """Unit-norm Vandermonde response of an ``n``-element half-wavelength ULA."""
    if n < 1:
        raise ValueError("n must be >= 1")
    phase = np.pi * np.sin(elevation) * np.cos(azimuth)
    return np.exp(1j * phase * np.arange(n)) / np.sqrt(n)


def _open_uniform(rng, low, high):
    while True:
        x = rng.uniform(low, high)
        if low < x < high:
            return x


def draw_paths(num_paths, rng):
    paths = []
    for _ in range(num_paths):
        gain = complex(rng.standard_normal(), rng.standard_normal()) / np.sqrt(2.0)
        aod_el = _open_uniform(rng, -np.pi / 2, np.pi / 2)
        aod_az = rng.uniform(0.0, 2 * np.pi)
        aoa_el = _open_uniform(rng, -np.pi / 2, np.pi / 2)
        aoa_az = rng.uniform(0.0, 2 * np.pi)
        paths.append(PathParams(gain, aod_el, aod_az, aoa_el, aoa_az))
    return paths


def channel_from_paths(n_t, n_r, paths):
    """Assemble ``sqrt(n_t n_r / L) * sum_l gain_l a_r a_t^H``."""
    h = np.zeros((n_r, n_t), dtype=np.complex128)
    for p in paths:
        a_r = steering_vector(n_r, p.aoa_elevation, p.aoa_azimuth)
        a_t = steering_vector(n_t, p.aod_elevation, p.aod_azimuth)
        h += p.gain * np.outer(a_r, a_t.conj())
    return np.sqrt(n_t * n_r / len(paths)) * h


def generate_channel(n_t, n_r, num_paths=5, rng=None):
    """Draw one channel realization.

    Parameters
    ----------
    n_t, n_r : int
        Transmit and receive array sizes.
    num_paths : int
        Number of propagation paths ``L``; each path has unit average power.
    rng : int, SeedSequence or Generator
        Anything ``np.random.default_rng`` accepts. The same seed always
        gives the same realization.
    """
    if min(n_t, n_r, num_paths) < 1:
        raise ValueError("dimensions must be >= 1")
    rng = np.random.default_rng(rng)
    paths = draw_paths(num_paths, rng)
    return ChannelRealization(channel_from_paths(n_t, n_r, paths), paths)
