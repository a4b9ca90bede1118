import math
from fractions import Fraction

import numpy as np
import pytest

from kloosbox import covering
from kloosbox.errors import BudgetExceeded
from kloosbox.modarith import factorize

from . import oracles


def test_solution_points_examples():
    assert set(covering.solution_points(5).points) == {(1, 1), (2, 3), (3, 2), (4, 4)}
    assert covering.solution_points(2).points == ((1, 1),)
    assert len(covering.solution_points(12).points) == 4
    with pytest.raises(ValueError):
        covering.solution_points(1)


def test_solution_points_count_and_symmetry():
    for q in list(range(2, 400)) + [9973, 10_000]:
        pts = covering.solution_points(q).points
        assert len(pts) == factorize(q).phi
        assert set(pts) == {(y, x) for x, y in pts}
        assert all(x * y % q == 1 and 1 <= x < q for x, y in pts)


def test_divisions_for():
    assert covering.divisions_for(101) == 2048
    assert covering.divisions_for(101, 101 / 2048) == 2048
    assert covering.divisions_for(30, 0.25) == 120
    assert covering.divisions_for(7, Fraction(7, 3)) == 3
    with pytest.raises(ValueError):
        covering.divisions_for(7, 0.3)


def test_single_point_geometry():
    rep = covering.covering_radius_max(2, 2 / 64)
    assert rep.r_max == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("q", [2, 3, 5, 12, 17, 29, 30])
def test_envelope_equals_direct_oracle(q):
    m = 4 * q  # h = 1/4
    assert (covering.distance_field(q, m) == covering.distance_field_direct(q, m)).all()


def test_direct_oracle_against_python_loop():
    q, m = 7, 14
    pts = [(m * x, m * y) for x, y in covering.solution_points(q).points]
    field = covering.distance_field_direct(q, m)
    for i in range(m + 1):
        for j in range(m + 1):
            assert field[i, j] == oracles.nearest_sq(i * q, j * q, pts)


def test_torus_mode_against_loop():
    q, m = 11, 22
    pts = [(m * (x + sx * q), m * (y + sy * q)) for x, y in covering.solution_points(q).points
           for sx in (-1, 0, 1) for sy in (-1, 0, 1)]
    field = covering.distance_field(q, m, torus=True)
    for i in range(m + 1):
        for j in range(m + 1):
            assert field[i, j] == oracles.nearest_sq(i * q, j * q, pts)


def test_reflection_symmetry():
    for q in [13, 40, 53]:
        field = covering.distance_field(q, 128)
        assert (field == field.T).all()


def test_r_max_bracket_and_envelope_observation():
    for q in [53, 59, 101, 151, 199]:
        fine = covering.covering_radius_max(q)
        coarse = math.sqrt(covering.distance_field_direct(q, 128).max()) / 128
        assert abs(fine.r_max - coarse) <= q / 128 * math.sqrt(2) / 2 + 1e-12
        assert fine.r_max <= q**0.75 * math.log(q)


def test_coverage_fraction_properties():
    q = 101
    assert covering.coverage_fraction(q, q * math.sqrt(2), q / 256) == 1.0
    zero = covering.coverage_fraction(q, 0, q / 256)
    assert 0 <= zero <= 100 / 257**2
    radii = [0, 2, 5, 10, 4 * math.ceil(math.sqrt(q)), 60]
    fr = [covering.coverage_fraction(q, r, q / 256) for r in radii]
    assert fr == sorted(fr)
    assert all(0 <= f <= 1 for f in fr)
    with pytest.raises(ValueError):
        covering.coverage_fraction(q, -1, q / 256)


def test_curve_monotone_and_complete():
    rep = covering.covering_radius_max(53, 53 / 512)
    rs = [r for r, _ in rep.curve]
    fs = [f for _, f in rep.curve]
    assert rs == sorted(rs) and fs == sorted(fs)
    assert fs[-1] == 1.0
    assert rep.error_bound == pytest.approx(53 / 512 * math.sqrt(2) / 2)
    for r, f in rep.curve[::8]:
        assert f == covering.coverage_fraction(53, r, 53 / 512)


def test_r_tilde():
    q = 101
    full = covering.r_tilde(q, 1.0, q / 512)
    assert full.r_tilde_estimate == full.r_max
    high = covering.r_tilde(q, 0.99, q / 512)
    assert high.r_tilde_estimate <= high.r_max
    assert covering.coverage_fraction(q, high.r_tilde_estimate, q / 512) >= 0.99
    # nothing smaller reaches the target on this grid
    assert covering.coverage_fraction(q, np.nextafter(high.r_tilde_estimate, 0), q / 512) < 0.99
    tiny = covering.r_tilde(q, 1e-9, q / 512)
    assert tiny.r_tilde_estimate <= (q / 512) * math.sqrt(2)
    thetas = [0.1, 0.5, 0.9, 0.99, 1.0]
    est = [covering.r_tilde(q, th, q / 512).r_tilde_estimate for th in thetas]
    assert est == sorted(est)
    with pytest.raises(ValueError):
        covering.r_tilde(q, 0.0)


def test_grid_budget():
    with pytest.raises(BudgetExceeded):
        covering.covering_radius_max(101, 101 / 4096, limit=10**6)
