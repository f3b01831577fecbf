"""High-dimensional QKD metrics over the OAM/ANG mutually unbiased bases.

The d = 2L+1 OAM letters are LG_{0, s*m}, m = -L..L, with mode spacing s.
The conjugate (angular) letters are the DFT superpositions of the same
modes.  A received letter k is scored by projecting onto receiver-plane LG
modes over the aperture disk R,

    p(k -> m) = sum_p |<LG_{p, s*m}, psi_k>_R|^2 / sum_{m', p} |<LG_{p, s*m'}, psi_k>_R|^2,

i.e. crosstalk rows are normalised within the captured d-dimensional
subspace (radial orders p <= p_max included in both sums).  The QBER of a
basis is the mean off-diagonal row mass and the secret-key bound is

    r_min = log2 d + 2 [ Q log2(Q/(d-1)) + (1-Q) log2(1-Q) ].
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, Grid
from .modes import LGModeSpec, ang_coeffs, lg_field, _disk_mask


@dataclass
class ProtocolConfig:
    """Encoding alphabet and measurement settings."""

    d: int = 5
    spacing: int = 1
    p_max: int = 9
    R: float = 0.15

    def __post_init__(self):
        if self.d < 2 or self.d % 2 == 0:
            raise ValueError("d must be odd and >= 3 (d = 2L+1)")
        if self.spacing < 1:
            raise ValueError("spacing must be >= 1")
        if self.p_max < 0:
            raise ValueError("p_max must be >= 0")
        if self.R <= 0:
            raise ValueError("aperture radius must be positive")

    @property
    def L(self) -> int:
        return (self.d - 1) // 2

    @property
    def l_values(self) -> np.ndarray:
        """Encoded azimuthal numbers, lowest first."""
        return self.spacing * np.arange(-self.L, self.L + 1)


def build_mubs(cfg: ProtocolConfig, w0: float, wavelength: float):
    """(OAM mode specs, ANG coefficient table F[j, m]) for the protocol.

    F rows are the angular letters expressed over the OAM letters; F is
    unitary, so the two bases are mutually unbiased.
    """
    specs = [LGModeSpec(0, int(l), w0, wavelength) for l in cfg.l_values]
    table = np.stack([ang_coeffs(j, cfg.L) for j in range(cfg.d)])
    return specs, table


class ModalProjector:
    """Cached receiver-plane LG projections over an aperture disk.

    coefficients(field) returns c[m, p] = <LG_{p, l_m}(z), field>_R for all
    encoded l values and p = 0..p_max in one matrix product.
    """

    def __init__(self, grid: Grid, z: float, w0: float, wavelength: float, l_values, p_max: int, R: float):
        self.grid = grid
        self.z = z
        self.R = float(R)
        self.l_values = np.asarray(l_values, dtype=np.int64)
        self.p_max = int(p_max)
        self.mask = _disk_mask(grid, self.R)
        rows = []
        for l in self.l_values:
            for p in range(self.p_max + 1):
                mode = lg_field(LGModeSpec(p, int(l), w0, wavelength), grid, z)
                rows.append(np.conj(mode.samples[self.mask]))
        self._proj = np.stack(rows) * grid.pitch**2

    def coefficients(self, field: ComplexField) -> np.ndarray:
        if field.grid != self.grid:
            raise ValueError("field grid does not match projector grid")
        c = self._proj @ field.samples[self.mask]
        return c.reshape(len(self.l_values), self.p_max + 1)


def oam_spectrum(field: ComplexField, w0: float, wavelength: float, l_values, p_max: int = 9, R: float | None = None) -> np.ndarray:
    """Azimuthal power spectrum p_l = sum_p |<LG_{p,l}, field>|^2 over the window.

    R defaults to the grid half extent; the sum over the full (l, p) family
    never exceeds the power inside the disk (Bessel-type inequality).
    """
    g = field.grid
    R = g.half_extent if R is None else R
    proj = ModalProjector(g, field.z, w0, wavelength, l_values, p_max, R)
    c = proj.coefficients(field)
    return np.sum(np.abs(c) ** 2, axis=1)


@dataclass
class CrosstalkMatrix:
    """Row-stochastic d x d transition matrix for one basis and realization."""

    basis: str
    values: np.ndarray
    l_values: np.ndarray
    realization: int = -1
    t: float = 0.0

    def __post_init__(self):
        v = self.values
        if v.shape != (len(self.l_values), len(self.l_values)):
            raise ValueError("matrix shape does not match letter count")
        if np.any(v < -1e-12):
            raise ValueError("negative transition probability")
        if np.max(np.abs(v.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("rows must sum to 1 within 1e-9")

    def qber(self) -> float:
        d = self.values.shape[0]
        return float(1.0 - np.trace(self.values) / d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# basis={self.basis} realization={self.realization} t={self.t:.12g}\n")
        buf.write(",".join(str(int(l)) for l in self.l_values) + "\n")
        for row in self.values:
            buf.write(",".join(f"{x:.12g}" for x in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CrosstalkMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln]
        meta = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
        l_values = np.array([int(x) for x in lines[1].split(",")])
        values = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
        return cls(meta["basis"], values, l_values, int(meta["realization"]), float(meta["t"]))


def crosstalk_pair(coeff_stack: np.ndarray, table: np.ndarray, l_values) -> tuple[CrosstalkMatrix, CrosstalkMatrix]:
    """OAM and ANG crosstalk matrices from one set of modal coefficients.

    coeff_stack[k, m, p] are the LG projections of the received OAM letter k.
    The received angular letter j is the superposition sum_k F[j,k] psi_k, so
    its projections follow by linearity without extra propagation, and the
    angular analyser is the conjugate superposition of the same LG modes.
    """
    d = coeff_stack.shape[0]
    raw_oam = np.sum(np.abs(coeff_stack) ** 2, axis=2)
    oam = _normalise_rows(raw_oam, "OAM")

    c_ang = np.tensordot(table, coeff_stack, axes=(1, 0))  # [j, m, p]
    a = np.einsum("nm,jmp->jnp", np.conj(table), c_ang)  # analyser n on letter j
    raw_ang = np.sum(np.abs(a) ** 2, axis=2)
    ang = _normalise_rows(raw_ang, "ANG")
    lv = np.asarray(l_values, dtype=np.int64)
    return (
        CrosstalkMatrix("OAM", oam, lv),
        CrosstalkMatrix("ANG", ang, lv),
    )


class DegenerateRealization(RuntimeError):
    """A letter arrived with (numerically) zero captured energy."""


def _normalise_rows(raw: np.ndarray, basis: str) -> np.ndarray:
    denom = raw.sum(axis=1, keepdims=True)
    if np.any(denom <= 1e-300):
        raise DegenerateRealization(f"{basis} letter captured no energy; discard realization")
    return raw / denom


def qber(matrix: CrosstalkMatrix) -> float:
    return matrix.qber()


def secret_key_rate(q: float, d: int) -> float:
    """Lower bound on secret bits per sifted photon at QBER q in dimension d."""
    if not 0.0 <= q < 1.0:
        raise ValueError("QBER must be in [0, 1)")
    if d < 2:
        raise ValueError("d must be >= 2")
    h = 0.0
    if q > 0.0:
        h += q * math.log2(q / (d - 1))
    if q < 1.0:
        h += (1.0 - q) * math.log2(1.0 - q)
    return math.log2(d) + 2.0 * h
