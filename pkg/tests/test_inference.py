import math
import random
from math import comb, sqrt

import numpy as np
import pytest
from scipy import special, stats

from randcomplex import (
    ModelParams,
    Seed,
    build_from_facets,
    chi_square_quantile,
    complete_complex,
    gof_critical,
    gof_triangle,
    mle_fit,
    sample_multiparameter,
)

from conftest import random_complex


def test_mle_complete_complex():
    fit = mle_fit(complete_complex(4, dim=2), 2)
    assert fit.p_hat == (1.0, 1.0)
    assert fit.i_observed == 2


def test_mle_boundary_case():
    K = build_from_facets(4, [(1, 2), (1, 3), (2, 3), (1, 4)])
    fit = mle_fit(K, 2)
    assert fit.p_hat[0] == pytest.approx(4 / 6)
    assert fit.p_hat[1] == 0.0
    assert fit.counts.h[2] == 1  # only {1,2,3} is a hollow triangle
    assert fit.i_observed == 2


def test_mle_relabel_invariance():
    rng = random.Random(8)
    for _ in range(10):
        K = random_complex(rng, 9)
        fit = mle_fit(K, 3)
        perm = list(range(1, 10))
        rng.shuffle(perm)
        facets = [tuple(sorted(perm[v - 1] for v in f)) for f in K.maximal_faces()]
        fit2 = mle_fit(build_from_facets(9, facets), 3)
        assert fit.p_hat == fit2.p_hat


def test_mle_equals_grid_search_argmax():
    """The ratio form maximises the log-likelihood (grid oracle, step 1e-3)."""
    rng = random.Random(12)
    grid = np.arange(0.001, 1.0, 0.001)
    for _ in range(12):
        K = random_complex(rng, rng.randint(4, 8))
        fit = mle_fit(K, 2)
        for i in (1, 2):
            s, h = fit.counts.s[i], fit.counts.h[i]
            if h == 0:
                assert fit.p_hat[i - 1] == 0.0
                continue
            ll = s * np.log(grid) + (h - s) * np.log1p(-grid)
            best = grid[int(np.argmax(ll))]
            assert abs(best - fit.p_hat[i - 1]) <= 1e-3 + 1e-12


def test_mle_asymptotically_unbiased():
    params = ModelParams(30, (0.6, 0.3))
    reps = 800
    hats = np.empty((reps, 2))
    for r in range(reps):
        hats[r] = mle_fit(sample_multiparameter(params, Seed(14, r)), 2).p_hat
    for i, truth in enumerate((0.6, 0.3)):
        se = hats[:, i].std(ddof=1) / sqrt(reps)
        assert abs(hats[:, i].mean() - truth) <= 4 * se


def test_chi_square_quantile_closed_form():
    assert chi_square_quantile(2, 0.95) == pytest.approx(-2 * math.log(0.05), abs=1e-10)
    z = stats.norm.ppf(0.975)
    assert chi_square_quantile(1, 0.95) == pytest.approx(z * z, abs=1e-8)


def test_chi_square_quantile_against_bisection_oracle():
    # invert the regularized incomplete gamma by bisection
    def oracle(df, prob):
        lo, hi = 0.0, 1e4
        for _ in range(200):
            mid = (lo + hi) / 2
            if special.gammainc(df / 2, mid / 2) < prob:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    for df in (1, 2, 5):
        for prob in (0.5, 0.9, 0.99):
            assert chi_square_quantile(df, prob) == pytest.approx(
                oracle(df, prob), abs=1e-8)


def test_chi_square_quantile_monotone_and_errors():
    qs = [chi_square_quantile(3, p) for p in (0.1, 0.5, 0.9, 0.99)]
    assert qs == sorted(qs)
    with pytest.raises(ValueError):
        chi_square_quantile(0, 0.5)
    with pytest.raises(ValueError):
        chi_square_quantile(2, 1.0)


def test_gof_deterministic():
    K = sample_multiparameter(ModelParams(40, (0.5, 0.5)), Seed(70))
    a = gof_critical(K, 2, 0.05)
    b = gof_critical(K, 2, 0.05)
    assert a == b


def test_gof_structure_on_null_sample():
    K = sample_multiparameter(ModelParams(60, (0.5, 0.5, 0.5)), Seed(71))
    res = gof_critical(K, 3, 0.05)
    assert res.components == (2, 3, 4)
    assert res.df == 3
    assert res.threshold == pytest.approx(chi_square_quantile(3, 0.95))
    assert res.reject == (res.statistic > res.threshold)
    assert not res.inconclusive
    sig = np.array(res.sigma)
    assert np.allclose(np.diag(sig), 1.0)
    assert np.all(np.abs(sig) <= 1.0)
    d = res.as_dict()
    assert set(d) >= {"p_hat", "t", "w", "sigma", "statistic", "df",
                      "threshold", "reject", "warnings"}


def test_gof_diagonal_sigma_flag():
    K = sample_multiparameter(ModelParams(60, (0.5, 0.5, 0.5)), Seed(72))
    res = gof_critical(K, 3, 0.05, diagonal_sigma=True)
    sig = np.array(res.sigma)
    assert np.allclose(sig, np.eye(len(sig)))
    # with identity sigma the statistic is just the squared norm of w
    assert res.statistic == pytest.approx(float(np.dot(res.w, res.w)))


def test_gof_k_prime_folding():
    K = sample_multiparameter(ModelParams(30, (1.0, 0.5)), Seed(73))
    res = gof_critical(K, 2, 0.05)
    # p_hat_1 is exactly 1 on a complete graph, so it folds automatically
    assert res.p_hat[0] == 1.0
    assert res.components == (3,)
    forced = gof_critical(K, 2, 0.05, k_prime=1)
    assert forced.components == (3,)


def test_gof_inconclusive_on_empty_complex():
    from randcomplex import SimplicialComplex

    res = gof_critical(SimplicialComplex(12), 2, 0.05)
    assert res.inconclusive
    assert not res.reject
    assert res.warnings


def test_gof_triangle_basics():
    K = sample_multiparameter(ModelParams(40, (0.5, 0.5)), Seed(74))
    res = gof_triangle(K, 2, 0.05)
    assert res.df == 1
    assert res.statistic == pytest.approx(res.w[0] ** 2)
    assert res.t_observed[0] == K.size_counts()[2]
    with pytest.raises(ValueError):
        gof_triangle(K, 1, 0.05)


def test_gof_triangle_inconclusive_without_triangles():
    K = sample_multiparameter(ModelParams(12, (0.4,)), Seed(75))
    res = gof_triangle(K, 2, 0.05)
    assert res.inconclusive


def test_gof_alpha_validation():
    K = sample_multiparameter(ModelParams(20, (0.5,)), Seed(76))
    with pytest.raises(ValueError):
        gof_critical(K, 1, 0.0)
    with pytest.raises(ValueError):
        gof_critical(K, 1, 1.0)


def test_size_of_test_under_null():
    """Empirical rejection rate at alpha=0.05 stays within (or below) the
    exact binomial 99% band over 200 replicates."""
    params = ModelParams(75, (0.5, 0.5))
    reps = 200
    rejections = 0
    inconclusive = 0
    for r in range(reps):
        K = sample_multiparameter(params, Seed(90, r))
        res = gof_critical(K, 2, 0.05)
        rejections += res.reject
        inconclusive += res.inconclusive
    assert inconclusive == 0
    upper = int(stats.binom.ppf(0.995, reps, 0.05))
    assert rejections <= upper
