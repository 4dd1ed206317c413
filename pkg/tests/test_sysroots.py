"""Small polynomial systems: signals, bivariate solving, and the H/K/L functionals."""
import math

import numpy as np
import pytest

from randroots.polyalg import MonomialPoly, MultiPoly, eval_multi
from randroots.sysroots import (
    DegenerateResultant,
    NotFullySplit,
    OddDegree,
    PolySystem,
    compute_functionals,
    count_real_solutions,
    functionals,
    hypothesis_check,
    signal_product,
    signal_sphere,
    solve_bivariate,
)

T_SPLIT = MonomialPoly((-1.0, 0.0, 1.0))  # x^2 - 1, roots +-1


def test_signal_product_counts_are_powers_of_two():
    for m in (1, 2, 3):
        system = signal_product(T_SPLIT, m)
        assert system.bezout == 2 ** m
        assert count_real_solutions(system) == 2 ** m


def test_signal_product_rejects_non_split_template():
    with pytest.raises(NotFullySplit):
        signal_product(MonomialPoly((1.0, 0.0, 1.0)), 2)  # x^2 + 1


def test_signal_sphere_values_and_degree_check():
    f = signal_sphere(2, 1.5, 2)
    assert eval_multi(f, [3.0, 4.0]) == pytest.approx(25.0 - 2.25, rel=1e-12)
    g = signal_sphere(4, 1.0, 3)
    for pt in ([1.0, 0.0, 0.0], [0.5, 0.5, 0.5]):
        n2 = sum(v * v for v in pt)
        assert eval_multi(g, pt) == pytest.approx(n2 ** 2 - 1.0, rel=1e-12,
                                                  abs=1e-12)
    with pytest.raises(OddDegree):
        signal_sphere(3, 1.0, 2)


def test_solve_bivariate_circle_hyperbola():
    # x^2 + y^2 = 4 and xy = 1: four real points with x^2 = 2 +- sqrt(3)
    f1 = MultiPoly(2, 2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -4.0})
    f2 = MultiPoly(2, 2, {(1, 1): 1.0, (0, 0): -1.0})
    system = PolySystem(2, (f1, f2))
    sol = solve_bivariate(system)
    assert sol.bezout == 4
    assert len(sol.points) == 4
    xs = sorted(abs(x) for x, _ in sol.points)
    lo, hi = math.sqrt(2.0 - math.sqrt(3.0)), math.sqrt(2.0 + math.sqrt(3.0))
    np.testing.assert_allclose(xs, [lo, lo, hi, hi], rtol=1e-8)
    for x, y in sol.points:
        assert abs(eval_multi(f1, [x, y])) < 1e-7
        assert abs(eval_multi(f2, [x, y])) < 1e-7
    assert sol.residual_max < 1e-7


def test_solve_bivariate_no_real_solutions():
    # two disjoint circles
    f1 = MultiPoly(2, 2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    f2 = MultiPoly(2, 2, {(2, 0): 1.0, (0, 2): 1.0, (1, 0): -8.0, (0, 0): 15.0})
    assert len(solve_bivariate(PolySystem(2, (f1, f2))).points) == 0


def test_solve_bivariate_degenerate_pair_raises():
    f = MultiPoly(2, 2, {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    with pytest.raises(DegenerateResultant):
        solve_bivariate(PolySystem(2, (f, f)))


def test_count_real_solutions_separable_and_regions():
    # x^2 = 1, y^2 = 4 -> four corners (+-1, +-2)
    f1 = MultiPoly(2, 2, {(2, 0): 1.0, (0, 0): -1.0})
    f2 = MultiPoly(2, 2, {(0, 2): 1.0, (0, 0): -4.0})
    system = PolySystem(2, (f1, f2))
    assert count_real_solutions(system) == 4
    assert count_real_solutions(system, region=((0.0, 2.0), (0.0, 3.0))) == 1
    assert count_real_solutions(system, region=((-2.0, 2.0), (0.0, 3.0))) == 2
    assert count_real_solutions(system, region=((5.0, 9.0), (0.0, 3.0))) == 0


def test_functionals_linear_signal_closed_forms():
    # P(x) = x, d = 1: the normalized field is (1+x^2)^(-3/2), so
    # H = sup (1+|x|)(1+x^2)^(-3/2) at x = (sqrt(17)-3)/4 and K = 1
    P = MultiPoly(1, 1, {(1,): 1.0})
    H, K, L = functionals(P, 1, n_points=4000)
    x_star = (math.sqrt(17.0) - 3.0) / 4.0
    h_star = (1.0 + x_star) * (1.0 + x_star ** 2) ** -1.5
    assert H == pytest.approx(h_star, rel=1e-6)
    assert K == pytest.approx(1.0, rel=1e-6)
    for r in (0.5, 1.0, 2.0, 5.0):
        assert L(r) == pytest.approx(r * r / (1.0 + r * r), rel=1e-2)


def test_functionals_sphere_signal_infimum():
    # sphere signal d=2, r=1, m=2: on ||x|| >= 2 the infimum is 9/25
    P = signal_sphere(2, 1.0, 2)
    _, _, L = functionals(P, 2, n_points=4000)
    assert L(2.0) == pytest.approx(9.0 / 25.0, rel=1e-2)


def test_hypothesis_check_bounded_vs_unbounded_zero_sets():
    # m=1 product signal: zero set {+-1} is bounded, so L stays positive
    s1 = signal_product(T_SPLIT, 1)
    A1, B1, ok1 = hypothesis_check(s1.equations, (2,), r0=2.0, ell=1e-3)
    assert ok1 is True
    assert A1 > 0.0 and B1 > 0.0
    # m=2 product signal: zero lines escape to infinity, so L decays to 0
    s2 = signal_product(T_SPLIT, 2)
    A2, B2, ok2 = hypothesis_check(s2.equations, (2, 2), r0=2.0, ell=1e-3)
    assert ok2 is False


def test_compute_functionals_aggregates():
    s1 = signal_product(T_SPLIT, 1)
    sf = compute_functionals(s1.equations, (2,), n_points=3000)
    assert len(sf.H) == len(sf.K) == 1
    # m = 1: A_m reduces to H^2
    assert sf.A_m == pytest.approx(sf.H[0] ** 2, rel=1e-12)
    assert sf.B_m == pytest.approx(sf.K[0] ** 2, rel=1e-12)
    assert sf.L_at(0, 2.0) >= 0.0
    assert sf.grid_points == 3000


def test_polysystem_degree_bookkeeping():
    s = signal_product(T_SPLIT, 3)
    assert s.m == 3
    assert s.degrees == (2, 2, 2)
    assert s.bezout == 8
