"""Energy closed forms, gradient correctness, and the projected minimizer."""
import math

import numpy as np
import pytest

from randroots.complexsphere import Configuration, log_energy
from randroots.ensembles import SeedStream
from randroots.fekete import (
    cn_from_v,
    energy_gradient,
    energy_law,
    expected_energy_kostlan,
    expected_energy_uniform,
    fekete_to_json,
    minimize_energy,
    sample_uniform_sphere,
    smale7_gap,
    vn_from_cn,
)

LN2 = math.log(2.0)


def test_energy_expectation_values():
    # N = 2 closed form: 1/2 - (3/2) ln 2
    assert expected_energy_kostlan(2) == pytest.approx(0.5 - 1.5 * LN2,
                                                       rel=1e-13)
    assert expected_energy_uniform(2) == pytest.approx(
        -0.5 * math.log(4.0 / math.e), rel=1e-13)
    with pytest.raises(ValueError):
        expected_energy_uniform(1)


def test_energy_law_difference_identity():
    worst = 0.0
    for N in range(2, 10_001):
        law = energy_law(N)
        gap = law.e_uniform - law.e_kostlan
        target = N * math.log(N) / 4.0
        worst = max(worst, abs(gap - target) / max(1.0, abs(target)))
    assert worst < 1e-12


def test_cn_v_parametrization_round_trip():
    for N in (2, 5, 12, 50, 997):
        for C in (-0.17, -0.0555, -0.01):
            assert cn_from_v(N, vn_from_cn(N, C)) == pytest.approx(C, abs=1e-9)


def test_uniform_sphere_sampling_moments():
    cfg = sample_uniform_sphere(4000, SeedStream(3, 0))
    norms = np.linalg.norm(cfg.points, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)
    # coordinate means vanish at the 4-sigma level (variance 1/3 each)
    assert np.max(np.abs(cfg.points.mean(axis=0))) < 4.0 / math.sqrt(3 * 4000)


def test_energy_gradient_matches_finite_differences():
    cfg = sample_uniform_sphere(6, SeedStream(5, 1))
    x = cfg.points
    g = energy_gradient(x)
    h = 1e-6
    for i in range(6):
        for j in range(3):
            xp = x.copy()
            xm = x.copy()
            xp[i, j] += h
            xm[i, j] -= h
            fd = (log_energy(Configuration(xp))
                  - log_energy(Configuration(xm))) / (2.0 * h)
            assert g[i, j] == pytest.approx(fd, rel=1e-4, abs=1e-4)


def test_minimizer_exact_small_configurations():
    targets = {2: -LN2, 3: -1.5 * math.log(3.0), 4: -3.0 * math.log(8.0 / 3.0)}
    for N, target in targets.items():
        best = math.inf
        for r in range(5):
            est = minimize_energy(sample_uniform_sphere(N, SeedStream(7, r)))
            best = min(best, est.V)
        assert best == pytest.approx(target, abs=1e-6), N


def test_minimizer_never_increases_energy():
    for r in range(4):
        c0 = sample_uniform_sphere(9, SeedStream(11, r))
        v0 = log_energy(c0)
        est = minimize_energy(c0)
        assert est.V <= v0 + 1e-12
        # applying the minimizer again cannot go back up
        est2 = minimize_energy(est.config)
        assert est2.V <= est.V + 1e-12


def test_minimizer_estimate_bookkeeping():
    est = minimize_energy(sample_uniform_sphere(5, SeedStream(13, 0)))
    assert est.config.n == 5
    assert est.C_N == pytest.approx(cn_from_v(5, est.V), rel=1e-13)
    assert isinstance(est.converged, bool)
    d = fekete_to_json(est)
    assert d["N"] == 5
    assert d["V"] == est.V


def test_smale7_gap_is_zero_at_reference():
    cfg = sample_uniform_sphere(8, SeedStream(17, 0))
    v = log_energy(cfg)
    assert smale7_gap(cfg, v) == pytest.approx(0.0, abs=1e-12)
    assert smale7_gap(cfg, v - math.log(8.0)) == pytest.approx(1.0, rel=1e-12)
