"""Beacon-based adaptive-optics correction.

A plane-wave beacon co-propagates with the signal modes through the same
screens, filling the receiving aperture.  Its received phase, referenced to a
vacuum-propagated copy (the sensor calibration), is the measured
perturbation.  Correction branches:

  none       leave the signal untouched
  ideal      multiply by exp(-i phi_pert) pointwise (full conjugation; adding
             2 pi k cannot change exp(-i Phi), so unwrapping is irrelevant here)
  realistic  unwrap the perturbation (quality-guided flood fill, amplitude as
             quality), project the unwrapped surface onto the first N Zernike
             polynomials over the correction disk, and subtract the fit

Wrapped 2 pi cuts alias into spurious high-order structure under the modal
projection, which is why the realistic branch unwraps first; residues (branch
points) survive unwrapping by construction and are reported as diagnostics.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import flood_unwrap
from .grid import ComplexField
from .zernike import ZernikeBasis

TWO_PI = 2.0 * math.pi


@dataclass
class AOConfig:
    """Correction pipeline settings.

    R is the correction-disk radius for the Zernike fit; None selects the
    receiving aperture, clamped to the absorber-free region of the grid.
    """

    mode: str = "realistic"
    order: int = 30
    unwrap: bool = True
    R: Optional[float] = None
    camera_rate: float = 1000.0
    f_ao: float = 200.0
    delay_frames: int = 0

    def __post_init__(self):
        if self.mode not in ("none", "realistic", "ideal"):
            raise ValueError(f"unknown AO mode {self.mode!r}")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.delay_frames < 0:
            raise ValueError("delay_frames must be >= 0")
        if self.camera_rate <= 0 or self.f_ao <= 0:
            raise ValueError("camera_rate and f_ao must be positive")

    def resolved_delay(self) -> int:
        """Frames of latency implied by the loop rate when delay is enabled."""
        return int(round(self.camera_rate / self.f_ao))


@dataclass
class BeaconMeasurement:
    """Wrapped perturbation, its unwrapped surface and quality data."""

    wrapped: np.ndarray
    unwrapped: np.ndarray
    amplitude: np.ndarray
    wrap_counts: np.ndarray
    residues: int
    unwrapped_fraction: float


def beacon_phase(received: ComplexField, reference: ComplexField) -> tuple[np.ndarray, np.ndarray]:
    """Wrapped perturbation angle(E conj(E_ref)) in (-pi, pi] and |E| quality map."""
    if received.grid != reference.grid:
        raise ValueError("beacon and reference grids differ")
    prod = received.samples * np.conj(reference.samples)
    return np.angle(prod), np.abs(received.samples)


def wrap(phase: np.ndarray) -> np.ndarray:
    """Map to (-pi, pi]."""
    return np.angle(np.exp(1j * phase))


def residue_map(wrapped: np.ndarray) -> np.ndarray:
    """Charge (+1/0/-1) of each 2x2 plaquette of the wrapped phase."""
    dx = wrap(np.diff(wrapped, axis=1))
    dy = wrap(np.diff(wrapped, axis=0))
    loop = dx[:-1, :] + dy[:, 1:] - dx[1:, :] - dy[:, :-1]
    return np.rint(loop / TWO_PI).astype(np.int64)


def lit_residues(wrapped: np.ndarray, quality: np.ndarray, support_frac: float = 0.01) -> int:
    """Total |charge| over plaquettes whose four corners all carry light.

    The dark halo outside the beam is full of speckle vortices that say
    nothing about correction quality, so they are excluded from the count.
    """
    charges = np.abs(residue_map(wrapped))
    lit = quality > support_frac * quality.max()
    corners = lit[:-1, :-1] & lit[:-1, 1:] & lit[1:, :-1] & lit[1:, 1:]
    return int(charges[corners].sum())


def unwrap(wrapped: np.ndarray, quality: np.ndarray) -> BeaconMeasurement:
    """Quality-guided flood-fill unwrap; rewrapping reproduces the input exactly.

    Residue-bearing cuts cannot be removed: around each branch point one line
    of >pi jumps survives, routed through the lowest-quality pixels.  The
    unwrapped_fraction diagnostic is the share of 4-neighbour edges free of
    such jumps.
    """
    if wrapped.shape != quality.shape:
        raise ValueError("phase and quality shapes differ")
    k = flood_unwrap(wrapped, quality)
    unwrapped = wrapped + TWO_PI * k
    jumps_x = np.abs(np.diff(unwrapped, axis=1)) > math.pi
    jumps_y = np.abs(np.diff(unwrapped, axis=0)) > math.pi
    n_edges = jumps_x.size + jumps_y.size
    frac = 1.0 - (jumps_x.sum() + jumps_y.sum()) / n_edges
    residues = lit_residues(wrapped, quality)
    return BeaconMeasurement(
        wrapped=wrapped,
        unwrapped=unwrapped,
        amplitude=quality,
        wrap_counts=k,
        residues=residues,
        unwrapped_fraction=float(frac),
    )


def project(phase: np.ndarray, basis: ZernikeBasis) -> np.ndarray:
    """Zernike coefficients of the phase map over the basis disk."""
    return basis.project(phase)


def reconstruct(coeffs: np.ndarray, basis: ZernikeBasis) -> np.ndarray:
    """Phase surface of a coefficient vector; zero outside the disk."""
    return basis.reconstruct(coeffs)


def correct(field: ComplexField, phi_hat: np.ndarray) -> ComplexField:
    """Apply the corrector: multiply by exp(-i phi_hat)."""
    if phi_hat.shape != field.samples.shape:
        raise ValueError("correction surface does not match field shape")
    return ComplexField(field.grid, field.z, field.samples * np.exp(-1j * phi_hat))


def greenwood_frequency(v: float, r0: float) -> float:
    """f_G = 0.43 v / r0 for a single translating layer."""
    return 0.43 * v / r0


class CorrectionHistory:
    """Ring buffer of correction surfaces for loop-latency emulation."""

    def __init__(self, delay_frames: int):
        self.delay = int(delay_frames)
        self._buf: deque = deque(maxlen=self.delay + 1)

    def push(self, phi_hat: np.ndarray) -> None:
        self._buf.append(phi_hat)

    def delayed(self) -> tuple[Optional[np.ndarray], bool]:
        """(surface measured delay frames ago, ready flag).

        Not ready during cold start; callers apply no correction then.
        """
        if self.delay == 0:
            return (self._buf[-1] if self._buf else None), bool(self._buf)
        if len(self._buf) <= self.delay:
            return None, False
        return self._buf[0], True


def delayed_phase(history: CorrectionHistory) -> tuple[Optional[np.ndarray], bool]:
    return history.delayed()
