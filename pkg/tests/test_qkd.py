"""Protocol alphabet, crosstalk normalisation, QBER and key-rate bound."""

import math

import numpy as np
import pytest

from oamqkd.grid import ComplexField, Grid
from oamqkd.modes import lg_field
from oamqkd.qkd import (
    CrosstalkMatrix,
    DegenerateRealization,
    ModalProjector,
    ProtocolConfig,
    build_mubs,
    crosstalk_pair,
    oam_spectrum,
    secret_key_rate,
)

W0 = 0.03
LAM = 632e-9
GRID = Grid(256, 0.512 / 256)


def test_protocol_alphabet():
    cfg = ProtocolConfig(d=5, spacing=2)
    assert cfg.L == 2
    assert list(cfg.l_values) == [-4, -2, 0, 2, 4]
    with pytest.raises(ValueError):
        ProtocolConfig(d=4)
    with pytest.raises(ValueError):
        ProtocolConfig(d=1)
    with pytest.raises(ValueError):
        ProtocolConfig(spacing=0)
    with pytest.raises(ValueError):
        ProtocolConfig(R=0.0)


def test_mub_table_is_unitary():
    for d in (3, 5, 7):
        cfg = ProtocolConfig(d=d)
        specs, table = build_mubs(cfg, W0, LAM)
        assert len(specs) == d
        assert [s.l for s in specs] == list(cfg.l_values)
        assert np.abs(table @ table.conj().T - np.eye(d)).max() < 1e-12
        assert np.abs(np.abs(table) - 1.0 / math.sqrt(d)).max() < 1e-12


def _coeff_stack(cfg: ProtocolConfig, z: float = 0.0):
    specs, table = build_mubs(cfg, W0, LAM)
    proj = ModalProjector(GRID, z, W0, LAM, cfg.l_values, cfg.p_max, cfg.R)
    stack = np.stack([proj.coefficients(lg_field(s, GRID, z)) for s in specs])
    return stack, table


def test_undisturbed_letters_give_identity_crosstalk():
    cfg = ProtocolConfig(d=5, spacing=1)
    stack, table = _coeff_stack(cfg)
    oam, ang = crosstalk_pair(stack, table, cfg.l_values)
    for m in (oam, ang):
        assert np.abs(m.values - np.eye(cfg.d)).max() < 1e-6
        assert m.qber() < 1e-6
    q = 0.5 * (oam.qber() + ang.qber())
    assert abs(secret_key_rate(q, cfg.d) - math.log2(cfg.d)) < 1e-6


def test_crosstalk_invariant_under_global_phase():
    cfg = ProtocolConfig(d=3)
    stack, table = _coeff_stack(cfg)
    rotated = stack * np.exp(1j * 0.7312)
    a = crosstalk_pair(stack, table, cfg.l_values)
    b = crosstalk_pair(rotated, table, cfg.l_values)
    assert np.abs(a[0].values - b[0].values).max() < 1e-12
    assert np.abs(a[1].values - b[1].values).max() < 1e-12


def test_projector_validates_grid():
    cfg = ProtocolConfig(d=3)
    proj = ModalProjector(GRID, 0.0, W0, LAM, cfg.l_values, cfg.p_max, cfg.R)
    other = Grid(128, 0.512 / 128)
    f = ComplexField(other, 0.0, np.ones((128, 128), dtype=np.complex128))
    with pytest.raises(ValueError):
        proj.coefficients(f)


def test_degenerate_realization_raised_on_dark_letter():
    cfg = ProtocolConfig(d=3)
    stack, table = _coeff_stack(cfg)
    stack[1] = 0.0
    with pytest.raises(DegenerateRealization):
        crosstalk_pair(stack, table, cfg.l_values)


def test_crosstalk_matrix_validation():
    lv = np.array([-1, 0, 1])
    good = np.full((3, 3), 1.0 / 3.0)
    CrosstalkMatrix("OAM", good, lv)
    with pytest.raises(ValueError):
        CrosstalkMatrix("OAM", good[:2], lv)
    bad_sum = good.copy()
    bad_sum[0, 0] += 1e-6
    with pytest.raises(ValueError):
        CrosstalkMatrix("OAM", bad_sum, lv)
    negative = np.array([[1.1, -0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(ValueError):
        CrosstalkMatrix("OAM", negative, lv)


def test_qber_hand_value():
    m = CrosstalkMatrix("OAM", np.array([[0.9, 0.1], [0.2, 0.8]]), np.array([-1, 1]))
    assert abs(m.qber() - 0.15) < 1e-15


def test_csv_round_trip():
    cfg = ProtocolConfig(d=5)
    stack, table = _coeff_stack(cfg)
    oam, _ = crosstalk_pair(stack, table, cfg.l_values)
    oam.realization = 12
    oam.t = 0.034
    back = CrosstalkMatrix.from_csv(oam.to_csv())
    assert back.basis == "OAM"
    assert back.realization == 12
    assert back.t == 0.034
    assert np.array_equal(back.l_values, oam.l_values)
    assert np.abs(back.values - oam.values).max() < 1e-10


def test_secret_key_rate_reference_points():
    for d in (2, 3, 5, 7, 11):
        assert abs(secret_key_rate(0.0, d) - math.log2(d)) < 1e-15
    # zero crossings of the bound, located independently by bisection
    def threshold(d):
        lo, hi = 1e-9, 0.9
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if secret_key_rate(mid, d) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    assert abs(secret_key_rate(0.11, 2)) < 0.01
    assert abs(secret_key_rate(0.21, 5)) < 0.01
    assert abs(threshold(2) - 0.11) < 0.002
    assert abs(threshold(5) - 0.21) < 0.004
    with pytest.raises(ValueError):
        secret_key_rate(-0.1, 5)
    with pytest.raises(ValueError):
        secret_key_rate(1.0, 5)
    with pytest.raises(ValueError):
        secret_key_rate(0.1, 1)


def test_oam_spectrum_of_pure_mode():
    cfg = ProtocolConfig(d=7)
    f = lg_field(build_mubs(cfg, W0, LAM)[0][5], GRID, 0.0)  # l = +2
    spec = oam_spectrum(f, W0, LAM, cfg.l_values, p_max=5)
    assert spec.argmax() == 5
    assert spec[5] > 0.999
    assert np.delete(spec, 5).max() < 1e-6
    # Bessel inequality: family power never exceeds windowed field power
    assert spec.sum() <= f.power() + 1e-9
