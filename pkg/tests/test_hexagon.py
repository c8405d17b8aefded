import math

import mpmath
import numpy as np
import pytest

from schottky.errors import BadLengths, BadSides, DomainError
from schottky.hexagon import (
    KAPPA_GRID,
    f_kappa,
    hexagon_d,
    hexagon_e,
    hexagon_e_bound,
    inequality_suite,
    log_power_sum,
    q_norm,
)

mpmath.mp.dps = 40


def mp_e(a, b):
    return float(mpmath.asinh(mpmath.cosh(a) / mpmath.sinh(mpmath.mpf(b) / 2)))


def mp_d(a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    return float(mpmath.acosh(mpmath.cosh(a) * (1 + mpmath.cosh(b)) / (mpmath.sinh(a) * mpmath.sinh(b))))


def test_hexagon_e_examples():
    assert hexagon_e(0, 2) == pytest.approx(mp_e(0, 2), abs=1e-14)
    assert hexagon_e(0, 2) == pytest.approx(0.77194, abs=1e-5)
    assert hexagon_e(1, 2) == pytest.approx(mp_e(1, 2), abs=1e-14)
    assert hexagon_e(1, 2) == pytest.approx(1.08637, abs=1e-5)
    assert hexagon_e(1, 2) <= hexagon_e_bound(1, 2, 3.0)
    with pytest.raises(BadSides):
        hexagon_e(1, 0)


def test_hexagon_e_bound_constants():
    # the constant-3 comparison holds on the grid; the constant-1 version fails for small b
    grid = np.linspace(0.05, 5, 30)
    assert all(hexagon_e(a, b) <= hexagon_e_bound(a, b, 3.0) for a in grid for b in grid)
    assert any(hexagon_e(a, b) > hexagon_e_bound(a, b, 1.0) for a in grid for b in grid)


def test_hexagon_d_examples():
    assert hexagon_d(1, 1) == pytest.approx(mp_d(1, 1), abs=1e-13)
    assert hexagon_d(1, 1) == pytest.approx(1.70491, abs=1e-5)
    assert hexagon_d(1, 1) > hexagon_d(2, 1) > hexagon_d(3, 1)
    assert hexagon_d(0.1, 0.1) > 5
    with pytest.raises(BadSides):
        hexagon_d(0, 1)


def test_identities_on_grid():
    grid = np.linspace(0.1, 4.0, 20)
    for a in grid:
        for b in grid:
            e = hexagon_e(a, b)
            assert math.sinh(e) * math.sinh(b / 2) == pytest.approx(math.cosh(a), rel=1e-12)
            d = hexagon_d(a, b)
            assert math.cosh(d) == pytest.approx(math.cosh(a) * (1 + math.cosh(b)) / (math.sinh(a) * math.sinh(b)), rel=1e-12)


def test_d_decreasing_in_b():
    for a in (0.2, 1.0, 3.0):
        vals = [hexagon_d(a, b) for b in np.linspace(0.1, 8, 40)]
        assert all(x > y for x, y in zip(vals, vals[1:]))


def test_q_norm():
    assert q_norm(1, 1).q == 1
    assert q_norm(2, 6).q == 9
    for t in (0.5, 2, 10):
        assert q_norm(3 * t, 7 * t).q == pytest.approx(q_norm(3, 7).q, rel=1e-15)
    with pytest.raises(BadLengths):
        q_norm(0, 1)


def test_suite_hand_values():
    rep = inequality_suite(2, 3)
    r = rep.row(3, "i")
    assert r.lhs == pytest.approx(4.78517, abs=1e-4) and r.rhs == pytest.approx(3.42201, abs=1e-4) and r.passed
    r = rep.row(2, "i")
    assert r.lhs == pytest.approx(2.24275, abs=1e-4) and r.rhs == pytest.approx(1.76508, abs=1e-4) and r.passed
    r = rep.row(2, "iv")
    assert r.lhs == pytest.approx(math.pi / math.log(4) ** 2.8, rel=1e-12) and r.passed


def test_log_power_sum_direct():
    sums = log_power_sum(50)
    for g in (2, 7, 50):
        direct = sum(math.log(2 * g - 2 * i + 2) ** 1.6 for i in range(1, g + 1))
        assert sums[g - 1] == pytest.approx(direct, rel=1e-13)


def test_check_i_margin_ratio_increasing():
    rep = inequality_suite(3, 400)
    ratios = [rep.row(g, "i").lhs / rep.row(g, "i").rhs for g in range(3, 401)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_f_kappa_monotone():
    f = f_kappa(KAPPA_GRID, 5)
    assert np.all(np.diff(f) > 0)


def test_check_ii_existence():
    rep = inequality_suite(2, 30)
    assert all(rep.row(g, "ii").passed for g in range(2, 31))
    assert all(rep.row(g, "ii").lhs > rep.row(g, "ii").rhs for g in range(3, 31))


def test_check_iii_reported_not_raised():
    # the chain as stated does not hold on the grid; rows must carry the failure
    rep = inequality_suite(2, 10)
    rows = [rep.row(g, "iii") for g in range(2, 11)]
    assert all(not r.passed and r.margin < 0 for r in rows)


def test_csv_shape():
    text = inequality_suite(2, 100).to_csv().strip().splitlines()
    assert text[0] == "g,check_id,lhs,rhs,margin,pass"
    assert len(text) == 1 + 4 * 99
