"""Zernike table values, orthonormality and the project/reconstruct cycle."""

import math

import numpy as np
import pytest

from oamqkd.grid import Grid
from oamqkd.zernike import ZernikeBasis, noll_to_nm, zernike_eval

GRID = Grid(256, 0.512 / 256)
R = 0.2


# first eleven polynomials written out by hand as the reference
def _reference(j, rho, phi):
    table = {
        1: lambda: np.ones_like(rho),
        2: lambda: 2.0 * rho * np.cos(phi),
        3: lambda: 2.0 * rho * np.sin(phi),
        4: lambda: math.sqrt(3.0) * (2.0 * rho**2 - 1.0),
        5: lambda: math.sqrt(6.0) * rho**2 * np.sin(2.0 * phi),
        6: lambda: math.sqrt(6.0) * rho**2 * np.cos(2.0 * phi),
        7: lambda: math.sqrt(8.0) * (3.0 * rho**3 - 2.0 * rho) * np.sin(phi),
        8: lambda: math.sqrt(8.0) * (3.0 * rho**3 - 2.0 * rho) * np.cos(phi),
        9: lambda: math.sqrt(8.0) * rho**3 * np.sin(3.0 * phi),
        10: lambda: math.sqrt(8.0) * rho**3 * np.cos(3.0 * phi),
        11: lambda: math.sqrt(5.0) * (6.0 * rho**4 - 6.0 * rho**2 + 1.0),
    }
    return table[j]()


def test_noll_index_table():
    expected = {
        1: (0, 0), 2: (1, 1), 3: (1, -1), 4: (2, 0), 5: (2, -2), 6: (2, 2),
        7: (3, -1), 8: (3, 1), 9: (3, -3), 10: (3, 3), 11: (4, 0),
    }
    for j, nm in expected.items():
        assert noll_to_nm(j) == nm
    with pytest.raises(ValueError):
        noll_to_nm(0)


def test_first_eleven_match_reference():
    r, phi = GRID.polar()
    inside = r / R <= 1.0
    rho = r[inside] / R
    for j in range(1, 12):
        got = zernike_eval(j, GRID, R)[inside]
        assert np.abs(got - _reference(j, rho, phi[inside])).max() < 1e-12


def test_defocus_centre_value():
    z4 = zernike_eval(4, GRID, R)
    assert abs(z4[GRID.n // 2, GRID.n // 2] + math.sqrt(3.0)) < 1e-12


def test_completeness_recovers_unit_vectors():
    # projecting any sampled member must give back its coefficient vector
    basis = ZernikeBasis(GRID, R, 36)
    for j in (1, 2, 4, 11, 22, 36):
        a = basis.project(zernike_eval(j, GRID, R))
        e = np.zeros(36)
        e[j - 1] = 1.0
        assert np.abs(a - e).max() < 1e-3


def test_raw_gram_is_near_identity():
    g = ZernikeBasis(GRID, R, 36).gram()
    assert np.abs(g - np.eye(36)).max() < 0.05
    assert np.abs(np.diag(g) - 1.0).max() < 0.03


def test_project_reconstruct_cycle():
    basis = ZernikeBasis(GRID, R, 36)
    rng = np.random.default_rng(7)
    a = rng.standard_normal(36)
    surf = basis.reconstruct(a)
    back = basis.project(surf)
    assert np.abs(back - a).max() < 1e-9


def test_reconstruct_zero_outside_disk():
    basis = ZernikeBasis(GRID, R, 10)
    surf = basis.reconstruct(np.ones(10))
    r, _ = GRID.polar()
    assert np.all(surf[r > R + GRID.pitch] == 0.0)


def test_validation():
    with pytest.raises(ValueError):
        zernike_eval(1, GRID, 2.0 * GRID.half_extent)
    with pytest.raises(ValueError):
        ZernikeBasis(GRID, R, 0)
    basis = ZernikeBasis(GRID, R, 4)
    with pytest.raises(ValueError):
        basis.reconstruct(np.ones(5))
