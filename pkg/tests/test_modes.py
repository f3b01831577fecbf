"""Laguerre-Gauss sampling against quadrature and analytic beam facts."""

import math

import numpy as np
import pytest

from oamqkd.grid import ComplexField, Grid
from oamqkd.modes import (
    LGModeSpec,
    TruncationError,
    ang_coeffs,
    aperture_inner_product,
    lg_field,
)

W0 = 0.03
LAM = 632e-9
GRID = Grid(512, 0.512 / 512)


def test_unit_grid_power():
    f = lg_field(LGModeSpec(2, -3, W0, LAM), GRID, 0.0)
    assert abs(f.power() - 1.0) < 1e-12


def test_gram_orthonormal_by_quadrature():
    # independent check of the sampled family: the continuum modes are
    # orthonormal, so the full-grid quadrature Gram must be I within 1e-3
    modes = []
    for p in range(4):
        for l in range(-5, 6):
            modes.append(lg_field(LGModeSpec(p, l, W0, LAM), GRID, 0.0).samples.ravel())
    stack = np.stack(modes)
    gram = (stack @ np.conj(stack.T)) * GRID.pitch**2
    err = np.abs(gram - np.eye(len(modes)))
    assert err.max() < 1e-3


def test_azimuthal_phase_winding():
    l = 3
    f = lg_field(LGModeSpec(0, l, W0, LAM), GRID, 0.0)
    # accumulate wrapped phase differences around a ring at the peak radius
    n_samp = 720
    ang = np.linspace(-math.pi, math.pi, n_samp, endpoint=False)
    r_peak = W0 * math.sqrt(l / 2.0)
    ix = np.round(r_peak * np.cos(ang) / GRID.pitch).astype(int) + GRID.n // 2
    iy = np.round(r_peak * np.sin(ang) / GRID.pitch).astype(int) + GRID.n // 2
    ph = np.angle(f.samples[iy, ix])
    winding = np.angle(np.exp(1j * np.diff(ph, append=ph[0]))).sum()
    assert abs(winding - 2.0 * math.pi * l) < 1e-6


def test_peak_radius_scales_with_waist():
    l = 4
    spec = LGModeSpec(0, l, W0, LAM)
    for z in (0.0, spec.z_rayleigh):
        f = lg_field(spec, GRID, z)
        r, _ = GRID.polar()
        r_meas = r.ravel()[np.argmax(np.abs(f.samples) ** 2)]
        r_expect = spec.waist(z) * math.sqrt(l / 2.0)
        assert abs(r_meas - r_expect) < 2 * GRID.pitch


def test_beam_parameter_identities():
    spec = LGModeSpec(0, 0, W0, LAM)
    zr = spec.z_rayleigh
    assert math.isclose(zr, math.pi * W0**2 / LAM)
    assert math.isclose(spec.waist(zr), math.sqrt(2.0) * W0)
    assert math.isclose(spec.gouy(zr), math.pi / 4.0)
    assert spec.curvature_inv(0.0) == 0.0
    assert math.isclose(spec.curvature_inv(zr), 1.0 / (2.0 * zr))


def test_truncation_guard():
    small = Grid(64, 0.10 / 64)  # extent 0.10 m < 6 w0
    with pytest.raises(TruncationError):
        lg_field(LGModeSpec(0, 0, W0, LAM), small, 0.0)
    # extent clears 6 w(z) but a high-order mode still spills over the edge
    tight = Grid(64, 0.19 / 64)
    with pytest.raises(TruncationError):
        lg_field(LGModeSpec(9, 10, W0, LAM), tight, 0.0)


def test_ang_coeffs_are_mutually_unbiased():
    L = 3
    d = 2 * L + 1
    table = np.stack([ang_coeffs(j, L) for j in range(d)])
    assert np.abs(table @ np.conj(table.T) - np.eye(d)).max() < 1e-12
    assert np.abs(np.abs(table) - 1.0 / math.sqrt(d)).max() < 1e-12
    with pytest.raises(ValueError):
        ang_coeffs(d, L)
    with pytest.raises(ValueError):
        ang_coeffs(-1, L)


def test_ang_superposition_splits_evenly():
    L = 2
    d = 2 * L + 1
    c = ang_coeffs(1, L)
    fields = [lg_field(LGModeSpec(0, l, W0, LAM), GRID, 0.0) for l in range(-L, L + 1)]
    sup = ComplexField(GRID, 0.0, sum(ci * f.samples for ci, f in zip(c, fields)))
    for f in fields:
        ov = aperture_inner_product(f, sup, GRID.half_extent)
        assert abs(abs(ov) ** 2 - 1.0 / d) < 1e-3


def test_inner_product_validation():
    a = lg_field(LGModeSpec(0, 0, W0, LAM), GRID, 0.0)
    b = lg_field(LGModeSpec(0, 0, W0, LAM), Grid(256, 0.512 / 256), 0.0)
    with pytest.raises(ValueError):
        aperture_inner_product(a, b, 0.1)
    with pytest.raises(ValueError):
        aperture_inner_product(a, a, 0.0)
    with pytest.raises(ValueError):
        LGModeSpec(-1, 0, W0, LAM)
