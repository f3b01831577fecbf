"""Evolving von Karman phase screens.

A screen is synthesised spectrally (FFT over the von Karman PSD plus three
subharmonic octaves for the poorly sampled low frequencies) and then evolved
in time by conditional Gaussian extension: wind demand is decomposed into
whole-pixel row/column shifts plus fractional residuals carried to the next
step, and every shift generates one new edge line

    X = A Z + B beta,   A = <X Z^T> <Z Z^T>^-1,   B B^T = <X X^T> - A <Z X^T>

conditioned on a stencil of existing lines (the nearest few plus a geometric
tail that preserves outer-scale power), with all covariances drawn from the
isotropic phase covariance

    C(r) = (2 pi r / L0)^(5/6) (L0/r0)^(5/3)
           * Gamma(11/6) / (2^(5/6) pi^(8/3)) * [24/5 Gamma(6/5)]^(5/6)
           * K_(5/6)(2 pi r / L0).

The r -> 0 limit and the matching PSD normalisation are derived from the same
gamma-function constants, so 2*(C(0) - C(r)) reproduces the Kolmogorov
structure function 6.88 (r/r0)^(5/3) for r << L0.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import kv

from .grid import Grid

_G_11_6 = math.gamma(11.0 / 6.0)
_G_5_6 = math.gamma(5.0 / 6.0)
_G_1_6 = math.gamma(1.0 / 6.0)
_MACRO = (24.0 / 5.0 * math.gamma(6.0 / 5.0)) ** (5.0 / 6.0)

# C(0) = COV0 * (L0/r0)^(5/3)
_COV0 = _G_11_6 * _G_5_6 / (2.0 * math.pi ** (8.0 / 3.0)) * _MACRO
# matching two-sided phase PSD in cyclic frequency:
# S(f) = PSD_F * r0^(-5/3) * (f^2 + 1/L0^2)^(-11/6), the exact form of the
# usual 0.023 coefficient
_PSD_F = _G_11_6**2 * math.pi ** (-8.0 / 3.0) * _MACRO * (2.0 * math.pi) ** (2.0 / 3.0) / (2.0 * math.pi) ** (5.0 / 3.0)


def _bessel_profile(x: np.ndarray) -> np.ndarray:
    """g(x) = x^(5/6) K_(5/6)(x) * 2^(1/6)/Gamma(5/6), with g(0) = 1.

    Below x ~ 1e-3 the Bessel product is replaced by its ascending series,
    which keeps the r -> 0 limit exact.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 1e-3
    xs = x[small]
    x2 = 0.25 * xs * xs
    # I_{-5/6} series: successive terms divide by (k+1)(k + 1/6)
    s1 = 1.0 + x2 / (1.0 / 6.0) + x2 * x2 / (2.0 * (1.0 / 6.0) * (1.0 + 1.0 / 6.0))
    s2 = 1.0 + x2 / (1.0 + 5.0 / 6.0)
    out[small] = s1 - (math.pi * 2.0 ** (-2.0 / 3.0) / (_G_5_6 * _G_11_6)) * xs ** (5.0 / 3.0) * s2
    xl = x[~small]
    out[~small] = xl ** (5.0 / 6.0) * kv(5.0 / 6.0, xl) * 2.0 ** (1.0 / 6.0) / _G_5_6
    return out


def phase_covariance(r, r0: float, L0: float):
    """Isotropic von Karman phase covariance C(r) in rad^2."""
    if not (r0 > 0 and L0 > 0):
        raise ValueError("r0 and L0 must be positive")
    r = np.asarray(r, dtype=np.float64)
    c0 = _COV0 * (L0 / r0) ** (5.0 / 3.0)
    out = c0 * _bessel_profile(2.0 * math.pi * r / L0)
    return out if out.ndim else float(out)


def structure_function(r, r0: float, L0: float):
    """D(r) = 2 (C(0) - C(r))."""
    c0 = _COV0 * (L0 / r0) ** (5.0 / 3.0)
    return 2.0 * (c0 - phase_covariance(r, r0, L0))


@dataclass
class TurbulenceParams:
    """Path-integrated channel description; at most one of cn2/r0 may be left
    None and is filled by runner.derived_params."""

    cn2: Optional[float] = 2.2e-15
    r0: Optional[float] = None
    L0: float = 10.0
    v: float = 1.0
    theta: float = math.pi / 2.0
    z: float = 1000.0
    n_layers: int = 10

    def __post_init__(self):
        if self.cn2 is None and self.r0 is None:
            raise ValueError("one of cn2, r0 must be given")
        if self.L0 <= 0 or self.z <= 0 or self.n_layers < 1:
            raise ValueError("L0, z must be positive and n_layers >= 1")
        if self.v < 0:
            raise ValueError("wind speed must be >= 0")

    def layer_r0(self) -> float:
        """Fried parameter of each of the n_layers equal-strength slabs."""
        if self.r0 is None:
            raise ValueError("r0 not derived yet; call runner.derived_params")
        return self.r0 * self.n_layers ** (3.0 / 5.0)


# ---------------------------------------------------------------------------
# spectral synthesis
# ---------------------------------------------------------------------------


def initial_screen(grid: Grid, r0: float, L0: float, rng: np.random.Generator) -> np.ndarray:
    """One zero-mean von Karman screen (rad) on the grid.

    FFT synthesis over the sampled PSD plus three 3x3 subharmonic octaves
    (frequency spacing reduced 3x per octave) to restore the outer-scale
    variance that the coarse frequency grid misses.
    """
    if grid.pitch >= r0 / 2.0:
        raise ValueError(f"grid pitch {grid.pitch} must be < r0/2 = {r0 / 2.0}")
    n = grid.n
    df = 1.0 / grid.extent
    f = grid.freqs()
    fx, fy = np.meshgrid(f, f, indexing="xy")
    f0sq = 1.0 / L0**2
    psd = _PSD_F * r0 ** (-5.0 / 3.0) * (fx**2 + fy**2 + f0sq) ** (-11.0 / 6.0)
    psd[0, 0] = 0.0
    cn = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * np.sqrt(psd) * df
    screen = np.fft.ifft2(cn).real * n * n

    # subharmonic octaves
    x = (np.arange(n) - n // 2) * grid.pitch
    xx, yy = np.meshgrid(x, x, indexing="xy")
    for p in range(1, 4):
        dfp = df / 3.0**p
        fvals = np.array([-1.0, 0.0, 1.0]) * dfp
        sfx, sfy = np.meshgrid(fvals, fvals, indexing="xy")
        spsd = _PSD_F * r0 ** (-5.0 / 3.0) * (sfx**2 + sfy**2 + f0sq) ** (-11.0 / 6.0)
        spsd[1, 1] = 0.0
        scn = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) * np.sqrt(spsd) * dfp
        acc = np.zeros((n, n), dtype=np.complex128)
        for a in range(3):
            for b in range(3):
                if scn[a, b] != 0.0:
                    acc += scn[a, b] * np.exp(2j * math.pi * (sfx[a, b] * xx + sfy[a, b] * yy))
        screen += acc.real

    screen -= screen.mean()
    return screen


# ---------------------------------------------------------------------------
# conditional edge extension
# ---------------------------------------------------------------------------

_EXT_CACHE: dict = {}


def stencil_offsets(n: int, n_near: int = 2) -> tuple:
    """Line offsets conditioning a new edge line: the n_near nearest lines
    plus power-of-two offsets out to half the screen.

    Conditioning on adjacent lines alone reproduces the local statistics but
    lets the outer-scale power decay as the original material rolls out; the
    geometric tail pins the low frequencies at negligible extra cost.
    """
    offsets = list(range(1, n_near + 1))
    step = 1
    while step <= n_near:
        step *= 2
    while step <= n // 2:
        offsets.append(step)
        step *= 2
    return tuple(offsets)


def extension_matrices(n: int, pitch: float, r0: float, L0: float, offsets: tuple):
    """(A, B) for generating one new edge line conditioned on the existing
    lines at the given offsets.  By isotropy the same pair serves all four
    directions.

    Geometry (pitch units): new line X at offset 0, conditioning lines at
    offsets[0], offsets[1], ...; within a line points are ordered by the
    transverse index.
    """
    key = (n, float(pitch), float(r0), float(L0), tuple(offsets))
    hit = _EXT_CACHE.get(key)
    if hit is not None:
        return hit

    idx = np.arange(n)
    dy = (idx[:, None] - idx[None, :]).astype(np.float64)

    def line_cov(dx_pixels: float) -> np.ndarray:
        d = np.hypot(dx_pixels, dy) * pitch
        return phase_covariance(d, r0, L0)

    n_cond = len(offsets)
    czz = np.empty((n_cond * n, n_cond * n))
    for c, oc in enumerate(offsets):
        for c2, oc2 in enumerate(offsets):
            czz[c * n : (c + 1) * n, c2 * n : (c2 + 1) * n] = line_cov(float(oc - oc2))
    cxz = np.empty((n, n_cond * n))
    for c, oc in enumerate(offsets):
        cxz[:, c * n : (c + 1) * n] = line_cov(float(oc))
    cxx = line_cov(0.0)

    reg = 1e-9 * np.trace(czz) / (n_cond * n)
    czz[np.diag_indices_from(czz)] += reg
    a_mat = np.linalg.solve(czz, cxz.T).T
    m = cxx - a_mat @ cxz.T
    m = 0.5 * (m + m.T)
    w, vecs = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    b_mat = (vecs * np.sqrt(w)) @ vecs.T

    _EXT_CACHE[key] = (a_mat, b_mat)
    return a_mat, b_mat


class PhaseScreen:
    """A single turbulent layer that drifts with the wind.

    advance() converts wind motion into whole-pixel shifts (fractional demand
    is carried between calls in res_x/res_y, both always in [0, 1)) and fills
    each vacated edge line by conditional Gaussian extension, so the screen
    never repeats and never runs out.
    """

    def __init__(
        self,
        grid: Grid,
        r0: float,
        L0: float,
        v: float,
        theta: float,
        rng: np.random.Generator,
        n_near: int = 2,
        seed: int = -1,
    ):
        self.grid = grid
        self.r0 = float(r0)
        self.L0 = float(L0)
        self.v = float(v)
        self.theta = float(theta)
        self.rng = rng
        self.offsets = stencil_offsets(grid.n, n_near)
        self.seed = int(seed)
        self.res_x = 0.0
        self.res_y = 0.0
        self.last_shifts = (0, 0)
        self.phase = initial_screen(grid, r0, L0, rng)

    def advance(self, dt: float) -> None:
        """Move the frozen pattern by v*dt, horizontal demand first."""
        if dt < 0:
            raise ValueError("dt must be >= 0")
        n_move = self.v * dt / self.grid.pitch
        sx, self.res_x = _split_demand(self.res_x, n_move * math.sin(self.theta))
        sy, self.res_y = _split_demand(self.res_y, n_move * math.cos(self.theta))
        self.last_shifts = (sx, sy)
        while sx != 0 or sy != 0:
            if sx != 0:
                step = 1 if sx > 0 else -1
                self._extend(axis=1, sign=step)
                sx -= step
            if sy != 0:
                step = 1 if sy > 0 else -1
                self._extend(axis=0, sign=step)
                sy -= step

    def _extend(self, axis: int, sign: int) -> None:
        n = self.grid.n
        a_mat, b_mat = extension_matrices(n, self.grid.pitch, self.r0, self.L0, self.offsets)
        self.phase = np.roll(self.phase, sign, axis=axis)
        arr = self.phase if axis == 0 else self.phase.T
        if sign > 0:
            new_idx = 0
            cond = [arr[o] for o in self.offsets]
        else:
            new_idx = n - 1
            cond = [arr[n - 1 - o] for o in self.offsets]
        z = np.concatenate(cond)
        beta = self.rng.standard_normal(n)
        arr[new_idx] = a_mat @ z + b_mat @ beta


def _split_demand(res: float, add: float) -> tuple[int, float]:
    """Accumulate fractional pixel demand; return (whole shifts, new residual in [0,1))."""
    total = res + add
    shifts = math.floor(total)
    frac = total - shifts
    if frac >= 1.0:  # total - floor(total) can round up to 1.0 for tiny negative adds
        shifts += 1
        frac = 0.0
    return int(shifts), frac


# ---------------------------------------------------------------------------
# binary screen dump
# ---------------------------------------------------------------------------

_MAGIC = b"OQPS"
_HEADER = struct.Struct("<4sIIdddq")


def write_screen(path, screen: PhaseScreen) -> None:
    """Dump header {n, pitch, r0, L0, seed} + row-major float64 samples."""
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                _MAGIC, 1, screen.grid.n, screen.grid.pitch, screen.r0, screen.L0, screen.seed
            )
        )
        fh.write(np.ascontiguousarray(screen.phase, dtype="<f8").tobytes())


def read_screen(path):
    """Return (header dict, phase array) from a dump file."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        magic, version, n, pitch, r0, L0, seed = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a screen dump")
        data = np.frombuffer(fh.read(n * n * 8), dtype="<f8").reshape(n, n).copy()
    return {"version": version, "n": n, "pitch": pitch, "r0": r0, "L0": L0, "seed": seed}, data
