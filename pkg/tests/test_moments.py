import itertools
import math
import random
from fractions import Fraction
from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcomplex import (
    ModelParams,
    cone_prob,
    critical_mean_bounds,
    critical_mean_exact,
    critical_moment_report,
    critical_variance_exact,
    hollow_prob,
    limiting_covariance,
    limiting_covariance_upper_bound,
    mle_scaling,
    mu_of,
    span_prob,
)


# ---- exact enumeration oracle (tiny n) --------------------------------------

def _all_atoms(n, p):
    """(complex faces, probability) over the whole sample space; p by dimension."""
    verts = range(1, n + 1)
    p1 = p[0]
    p2 = p[1] if len(p) > 1 else 0.0
    p3 = p[2] if len(p) > 2 else 0.0
    pairs = list(itertools.combinations(verts, 2))
    for ebits in itertools.product([0, 1], repeat=len(pairs)):
        edges = {frozenset(e) for e, b in zip(pairs, ebits) if b}
        pe = 1.0
        for b in ebits:
            pe *= p1 if b else 1 - p1
        if pe == 0:
            continue
        tcands = [t for t in itertools.combinations(verts, 3)
                  if all(frozenset(e) in edges for e in itertools.combinations(t, 2))]
        for tbits in itertools.product([0, 1], repeat=len(tcands)):
            tris = {frozenset(t) for t, b in zip(tcands, tbits) if b}
            pt = pe
            for b in tbits:
                pt *= p2 if b else 1 - p2
            if pt == 0:
                continue
            qcands = [q for q in itertools.combinations(verts, 4)
                      if all(frozenset(t) in tris for t in itertools.combinations(q, 3))]
            if not qcands or p3 == 0.0:
                faces = {frozenset([v]) for v in verts} | edges | tris
                yield faces, pt
                continue
            for qbits in itertools.product([0, 1], repeat=len(qcands)):
                tets = {frozenset(q) for q, b in zip(qcands, qbits) if b}
                pq = pt
                for b in qbits:
                    pq *= p3 if b else 1 - p3
                if pq:
                    yield {frozenset([v]) for v in verts} | edges | tris | tets, pq


def _oracle_critical(faces, size):
    c = 0
    for s in faces:
        if len(s) != size:
            continue
        mn = min(s)
        if any(s | {j} in faces for j in range(1, mn)):
            continue
        if size >= 2 and all((s - {mn}) | {j} not in faces for j in range(1, mn)):
            continue
        c += 1
    return c


def _oracle_moments(n, p, size):
    mean = 0.0
    mean_sq = 0.0
    for faces, prob in _all_atoms(n, p):
        t = _oracle_critical(faces, size)
        mean += prob * t
        mean_sq += prob * t * t
    return mean, mean_sq - mean * mean


@pytest.mark.parametrize("p,k", [((0.5, 0.5), 1), ((0.5, 0.5), 2), ((0.6, 0.3), 1)])
def test_moments_match_enumeration_n4(p, k):
    mean_o, var_o = _oracle_moments(4, p, k + 1)
    params = ModelParams(4, p)
    assert critical_mean_exact(params, k) == pytest.approx(mean_o, abs=1e-11)
    assert critical_variance_exact(params, k).total == pytest.approx(var_o, abs=1e-11)


# frozen from the same enumeration oracle at n=5 (slow to rerun every time)
FROZEN_N5 = [
    ((0.5, 0.5), 0, 1, 1.350585937500, 0.928725242615),
    ((0.5, 0.5), 0, 2, 0.038085937500, 0.041762351990),
    ((0.3, 0.8), 0, 1, 0.564764025600, 0.494363754484),
    ((1.0, 0.5, 0.5), 1, 2, 0.970703125000, 0.714473724365),
    ((0.7,), 0, 1, 3.425100000000, 1.595445390000),
]


@pytest.mark.parametrize("p,kp,k,mean_o,var_o", FROZEN_N5)
def test_moments_match_frozen_enumeration_n5(p, kp, k, mean_o, var_o):
    params = ModelParams(5, p)
    assert params.k_prime == kp
    assert critical_mean_exact(params, k) == pytest.approx(mean_o, abs=1e-9)
    assert critical_variance_exact(params, k).total == pytest.approx(var_o, abs=1e-9)


def test_mu_examples():
    params = ModelParams(10, (0.5, 0.5))
    assert mu_of(1, params, 1) == 0.0
    assert mu_of(2, params, 1) == pytest.approx(0.1875)
    dead = ModelParams(10, (0.0,))
    for a in (1, 2, 5):
        assert mu_of(a, dead, 1) == 0.0


def test_probability_product_conventions():
    params = ModelParams(10, (1.0, 0.5, 0.5))
    kp = params.k_prime
    assert cone_prob(params, kp) == 1.0
    assert span_prob(params, kp) == 1.0
    assert cone_prob(params, 2) == pytest.approx(0.5)  # p_2^C(2,2)
    assert cone_prob(params, 4) == 0.0  # includes p_4 = 0
    assert hollow_prob(params, 1) == 1.0


def test_mean_exact_values():
    exact = critical_mean_exact(ModelParams(10, (0.5, 0.5)), 1)
    # independent rational evaluation of the finite sum
    rational = sum(
        comb(10 - l, 1) * Fraction(1, 2) * (Fraction(7, 8) ** (l - 1) - Fraction(1, 2) ** (l - 1))
        for l in range(1, 10))
    assert exact == pytest.approx(float(rational), abs=1e-12)
    assert exact == pytest.approx(8.416465312242508, abs=1e-9)
    assert critical_mean_exact(ModelParams(10, (0.5,)), 1) == pytest.approx(
        14.498046875, abs=1e-12)
    assert critical_mean_exact(ModelParams(10, (0.0,)), 1) == 0.0


def test_mean_k_range():
    params = ModelParams(6, (0.5, 0.5))
    with pytest.raises(ValueError):
        critical_mean_exact(params, 0)
    with pytest.raises(ValueError):
        critical_mean_exact(params, 6)


def test_bounds_bracket_examples():
    params = ModelParams(10, (0.5, 0.5))
    lo, up = critical_mean_bounds(params, 1)
    assert lo <= critical_mean_exact(params, 1) <= up
    # complete skeleton through size k+1: both bounds collapse to zero
    ones = ModelParams(10, (1.0, 1.0, 1.0))
    lo, up = critical_mean_bounds(ones, 1)
    assert lo == 0.0 and up == 0.0


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_bounds_bracket_property(data):
    n = data.draw(st.integers(min_value=4, max_value=50))
    d = data.draw(st.integers(min_value=1, max_value=3))
    kp = data.draw(st.integers(min_value=0, max_value=min(1, d - 1)))
    p = tuple(1.0 if i < kp else data.draw(
        st.floats(min_value=0.05, max_value=0.95)) for i in range(d))
    params = ModelParams(n, p)
    for k in range(params.k_prime + 1, min(d + 1, n - 1) + 1):
        lo, up = critical_mean_bounds(params, k)
        mean = critical_mean_exact(params, k)
        assert lo <= mean + 1e-9
        assert mean <= up + 1e-9


def test_variance_nonnegative_on_grid():
    rng = random.Random(13)
    for _ in range(200):
        n = rng.randint(5, 40)
        d = rng.randint(1, 3)
        p = tuple(rng.uniform(0.1, 0.95) for _ in range(d))
        params = ModelParams(n, p)
        k = rng.randint(1, min(d + 1, n - 1))
        var = critical_variance_exact(params, k)
        assert var.total >= -1e-9 * max(1.0, abs(var.v1) + abs(var.v2) + abs(var.v3))


def test_variance_zero_when_no_edges():
    var = critical_variance_exact(ModelParams(10, (0.0,)), 1)
    assert var.total == 0.0
    assert var.parts == (0.0, 0.0, 0.0, 0.0)


def test_limiting_covariance_diagonal_and_range():
    params = ModelParams(100, (0.5, 0.5, 0.5, 0.5))
    assert limiting_covariance(params, 2, 2) == 1.0
    with pytest.raises(ValueError):
        limiting_covariance(params, 0, 1)
    with pytest.raises(ValueError):
        limiting_covariance(params, 1, 5)


def test_limiting_covariance_value():
    params = ModelParams(100, (0.5, 0.5, 0.5, 0.5))
    val = limiting_covariance(params, 1, 2)
    # hand evaluation of the closed form at rho(2)=2^-3, rho(3)=2^-7, rho(1)=1/2
    rk, rr, rp = 0.125, 0.0078125, 0.5
    num = rk * rr * math.sqrt((2 - rk) * (2 - rr) * (2 - rk / rp) * (2 - rr / rp))
    den = (rk + rr - rk * rr / rp) * (rk + rr - rk * rr)
    assert val == pytest.approx(num / den, abs=1e-14)
    assert 0.0 <= val < 1.0


def test_limiting_covariance_upper_bound_grid():
    rng = random.Random(19)
    for _ in range(50):
        d = rng.randint(2, 4)
        p = tuple(rng.uniform(0.1, 0.9) for _ in range(d))
        params = ModelParams(50, p)
        for i in range(1, d):
            for j in range(i + 1, d + 1):
                val = limiting_covariance(params, i, j)
                bound = limiting_covariance_upper_bound(params, i, j)
                assert val <= bound + 1e-12
                assert bound < 1.0 + 1e-12


def test_sigma_matrix_positive_semidefinite():
    rng = random.Random(37)
    from randcomplex.moments import limiting_correlation_matrix
    for _ in range(40):
        d = rng.randint(2, 4)
        p = tuple(rng.uniform(0.15, 0.9) for _ in range(d))
        params = ModelParams(60, p)
        dims = list(range(1, d + 1))
        sig = limiting_correlation_matrix(params, dims)
        assert np.linalg.eigvalsh(sig).min() >= -1e-10


def test_mle_scaling():
    params = ModelParams(40, (0.5, 0.5))
    scale1, var1 = mle_scaling(params, 1)
    assert scale1 == pytest.approx(sqrt(comb(40, 2)))
    assert var1 == pytest.approx(0.25)
    scale2, var2 = mle_scaling(params, 2)
    assert hollow_prob(params, 2) == pytest.approx(0.125)
    assert scale2 == pytest.approx(sqrt(comb(40, 3) * 0.125))
    assert var2 == pytest.approx(0.25)


def test_moment_report_invariants():
    params = ModelParams(30, (0.6, 0.3))
    report = critical_moment_report(params, 1)
    lo, up = report.mean_bounds
    assert lo <= report.mean <= up
    assert report.variance.total >= 0.0
    sig = np.array(report.sigma_inf)
    assert np.allclose(np.diag(sig), 1.0)
    d = report.as_dict()
    assert set(d) == {"k", "mean", "mean_lower", "mean_upper", "variance", "V", "sigma_inf"}
