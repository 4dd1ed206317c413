"""Coefficient laws, seeded streams, and ensemble serialization."""
import math

import numpy as np
import pytest

from randroots.ensembles import (
    EnsembleSpec,
    SeedStream,
    binomial_sd,
    sample,
    sample_bernstein,
    sample_kac,
    sample_kostlan_complex,
    sample_shub_smale,
    shub_smale_sd,
    spec_from_json,
    spec_to_json,
)
from randroots.polyalg import eval_multi, multi_index_set


def test_seed_stream_is_deterministic_and_stream_separated():
    a = SeedStream(42, 7).normals(100)
    b = SeedStream(42, 7).normals(100)
    np.testing.assert_array_equal(a, b)
    c = SeedStream(42, 8).normals(100)
    assert not np.array_equal(a, c)
    d = SeedStream(43, 7).normals(100)
    assert not np.array_equal(a, d)


def test_seed_stream_normals_have_standard_moments():
    x = SeedStream(0, 1).normals(200_000)
    n = x.size
    assert abs(x.mean()) < 4.0 / math.sqrt(n)
    assert abs(x.var() - 1.0) < 4.0 * math.sqrt(2.0 / n)
    u = SeedStream(0, 2).uniforms(50_000)
    assert 0.0 <= u.min() and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4.0 / math.sqrt(12.0 * u.size)


def test_variance_factor_formulas():
    # univariate: sd^2 = C(d, k)
    idx = tuple((k,) for k in range(5))
    np.testing.assert_allclose(
        shub_smale_sd(4, idx) ** 2, [math.comb(4, k) for k in range(5)],
        rtol=1e-12)
    # multivariate: sd^2 = d! / (j1! j2! (d-|j|)!)
    assert shub_smale_sd(2, ((1, 1),))[0] ** 2 == pytest.approx(2.0, rel=1e-12)
    assert shub_smale_sd(3, ((1, 1),))[0] ** 2 == pytest.approx(6.0, rel=1e-12)
    np.testing.assert_allclose(
        binomial_sd(6) ** 2, [math.comb(6, k) for k in range(7)], rtol=1e-12)
    # the log-space form must survive huge degrees without overflow
    big = binomial_sd(1000)
    assert np.isfinite(big).all() and big[500] > 1e100


def test_sample_shapes_and_structural_degrees():
    rng = SeedStream(1, 0)
    k = sample_kac(7, rng)
    assert k.degree == 7 and len(k.coeffs) == 8
    (f,) = sample_shub_smale((5,), 1, SeedStream(1, 1))
    assert f.degree == 5
    f1, f2 = sample_shub_smale((2, 3), 2, SeedStream(1, 2))
    assert f1.degree == 2 and f2.degree == 3 and f1.m == 2
    (b,) = sample_bernstein((9,), 1, SeedStream(1, 3))
    assert b.degree == 9
    c = sample_kostlan_complex(16, SeedStream(1, 4))
    assert c.degree == 16


def test_kostlan_coefficient_variances_match_binomial_weights():
    N, n_draws = 6, 4000
    acc = np.zeros((n_draws, N + 1), dtype=complex)
    for i in range(n_draws):
        acc[i] = sample_kostlan_complex(N, SeedStream(9, i)).coeffs
    # |a_k|^2 expectation proportional to C(N,k); the constant factor is
    # irrelevant to the root distribution, so only proportionality is law
    vr = acc.real.var(axis=0) + acc.imag.var(axis=0)
    expected = np.array([math.comb(N, k) for k in range(N + 1)], dtype=float)
    ratio = vr / expected
    np.testing.assert_allclose(ratio / ratio.mean(), 1.0, atol=0.15)
    # pinned implementation convention: each part has variance C(N,k)
    np.testing.assert_allclose(ratio / 2.0, 1.0, atol=0.15)


def test_bernstein_coefficient_variances_are_inverse_binomial():
    d, n_draws = 9, 4000
    acc = np.zeros((n_draws, d + 1))
    for i in range(n_draws):
        (b,) = sample_bernstein((d,), 1, SeedStream(13, i))
        acc[i] = b.coeffs
    v = acc.var(axis=0)
    expected = np.array([1.0 / math.comb(d, k) for k in range(d + 1)])
    np.testing.assert_allclose(v / expected, 1.0, atol=0.15)


def test_rotation_invariance_first_two_moments_match():
    # for the m = 2 spherical-variance ensemble, f(x0) and f(Q x0) must have
    # the same first two moments for any fixed rotation Q
    theta = 0.77
    Q = np.array([[math.cos(theta), -math.sin(theta)],
                  [math.sin(theta), math.cos(theta)]])
    x0 = np.array([0.3, 0.7])
    x1 = Q @ x0
    n_draws = 20_000
    v0 = np.empty(n_draws)
    v1 = np.empty(n_draws)
    for i in range(n_draws):
        f, _ = sample_shub_smale((2, 2), 2, SeedStream(21, i))
        v0[i] = eval_multi(f, x0)
        v1[i] = eval_multi(f, x1)
    # both means are 0; both variances equal (1 + |x|^2)^d
    target = (1.0 + float(x0 @ x0)) ** 2
    for v in (v0, v1):
        assert abs(v.mean()) <= 3.0 * v.std(ddof=1) / math.sqrt(n_draws)
        var = v.var(ddof=1)
        stderr = var * math.sqrt(2.0 / (n_draws - 1))
        assert abs(var - target) <= 3.0 * stderr


def test_perturbed_ensemble_reduces_to_signal_at_sigma_zero():
    from randroots.polyalg import MonomialPoly
    from randroots.sysroots import signal_product

    system = signal_product(MonomialPoly((-1.0, 0.0, 1.0)), 1)
    spec = EnsembleSpec("Perturbed", 1, (2,), sigma=0.0,
                        signal=system.equations)
    spec = spec_from_json(spec_to_json(spec))  # exercise the round trip too
    (f,) = sample(spec, SeedStream(2, 5))
    assert eval_multi(f, [1.0]) == pytest.approx(0.0, abs=1e-12)
    assert eval_multi(f, [2.0]) == pytest.approx(3.0, rel=1e-12)


def test_spec_json_round_trip():
    specs = [
        EnsembleSpec("Kac", 1, (50,)),
        EnsembleSpec("ShubSmale", 2, (2, 2)),
        EnsembleSpec("BernsteinGauss", 1, (9,)),
        EnsembleSpec("KostlanComplex", 1, (16,)),
    ]
    for s in specs:
        t = spec_from_json(spec_to_json(s))
        assert t == s


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        EnsembleSpec("Nonsense", 1, (3,))
    with pytest.raises(ValueError):
        EnsembleSpec("Kac", 1, (0,))
    with pytest.raises(ValueError):
        EnsembleSpec("Kac", 1, (3,), sigma=1.0)  # sigma only for Perturbed
    with pytest.raises(ValueError):
        EnsembleSpec("Perturbed", 1, (3,))  # Perturbed needs sigma


def test_sampling_is_reproducible_via_spec_and_stream():
    spec = EnsembleSpec("ShubSmale", 1, (9,))
    (a,) = sample(spec, SeedStream(5, 3))
    (b,) = sample(spec, SeedStream(5, 3))
    assert a.coeffs == b.coeffs
