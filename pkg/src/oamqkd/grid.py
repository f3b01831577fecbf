"""Cartesian sampling grid and complex field container.

All physical quantities are SI. The grid is square, pitch-uniform, with the
spatial origin on the sample at index n/2 (n even), which keeps FFT-based
propagation free of half-pixel offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Square sampling grid: n samples per side, pitch in metres."""

    n: int
    pitch: float

    def __post_init__(self):
        if self.n < 64 or self.n % 2 != 0:
            raise ValueError(f"grid n must be even and >= 64, got {self.n}")
        if not self.pitch > 0:
            raise ValueError(f"grid pitch must be positive, got {self.pitch}")

    @property
    def extent(self) -> float:
        return self.n * self.pitch

    @property
    def half_extent(self) -> float:
        return 0.5 * self.n * self.pitch

    @property
    def x(self) -> np.ndarray:
        return _axis(self.n, self.pitch)

    def meshgrid(self):
        """(xx, yy) with origin at the centre sample."""
        return _mesh(self.n, self.pitch)

    def polar(self):
        """(r, phi) with phi = arctan2(yy, xx) in (-pi, pi]."""
        return _polar(self.n, self.pitch)

    def freqs(self) -> np.ndarray:
        """1-D spatial frequencies (cycles/m) in FFT order."""
        return np.fft.fftfreq(self.n, d=self.pitch)


@lru_cache(maxsize=32)
def _axis(n, pitch):
    return (np.arange(n) - n // 2) * pitch


@lru_cache(maxsize=32)
def _mesh(n, pitch):
    x = _axis(n, pitch)
    return np.meshgrid(x, x, indexing="xy")


@lru_cache(maxsize=32)
def _polar(n, pitch):
    xx, yy = _mesh(n, pitch)
    return np.hypot(xx, yy), np.arctan2(yy, xx)


@dataclass
class ComplexField:
    """Sampled scalar field at propagation distance z.

    samples[i, j] is the complex amplitude at y = (i - n/2)*pitch,
    x = (j - n/2)*pitch.
    """

    grid: Grid
    z: float
    samples: np.ndarray

    def __post_init__(self):
        if self.samples.shape != (self.grid.n, self.grid.n):
            raise ValueError("field samples do not match grid shape")
        self.samples = np.ascontiguousarray(self.samples, dtype=np.complex128)

    def power(self) -> float:
        """Discrete approximation of the total power integral."""
        return float(np.sum(np.abs(self.samples) ** 2)) * self.grid.pitch**2

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.z, self.samples.copy())
