"""Exact and limiting moments of critical-simplex counts, and MLE scaling.

Everything here is driven by three families of probability products over
the model vector p (empty products are 1, so an index at or below k' gives
exactly 1):

* cone_prob(a):     prod_{i=k'+1}^{a} p_i^C(a,i) -- the probability that a
  fixed vertex below a given a-set completes every face through itself.
* span_prob(a):     prod_{i=k'+1}^{a} p_i^C(a,i+1) -- the probability that
  a given a-set spans a simplex.
* hollow_prob(i):   prod_{j=1}^{i-1} p_j^C(i+1,j+1) -- the probability that
  a given (i+1)-set spans a hollow i-simplex.

Ratios of cone products are evaluated through integer exponent arithmetic,
never by division, so a zero top-level probability stays well-defined; a
genuinely negative exponent on a zero entry raises FormulaDomainError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .models import ModelParams


class FormulaDomainError(ValueError):
    """The parameter vector lies outside the validity of a closed form."""


def _pget(params: ModelParams, i: int) -> float:
    return params.prob(i)


def _exp_product(params: ModelParams, exponents: dict[int, int]) -> float:
    """prod_i p_i^{e_i} with 0^0 = 1; negative exponent on p_i = 0 raises."""
    out = 1.0
    for i, e in exponents.items():
        if e == 0:
            continue
        pi = _pget(params, i)
        if pi == 0.0 and e < 0:
            raise FormulaDomainError(
                f"p_{i} = 0 raised to negative power {e}")
        if pi != 1.0:
            out *= pi ** e
    return out


def cone_prob(params: ModelParams, a: int) -> float:
    kp = params.k_prime
    return _exp_product(params, {i: comb(a, i) for i in range(kp + 1, a + 1)})


def span_prob(params: ModelParams, a: int) -> float:
    kp = params.k_prime
    return _exp_product(params, {i: comb(a, i + 1) for i in range(kp + 1, a + 1)})


def hollow_prob(params: ModelParams, i: int) -> float:
    return _exp_product(params, {j: comb(i + 1, j + 1) for j in range(1, i)})


def _check_k(params: ModelParams, k: int) -> None:
    # below k'+1 every count is deterministic and the closed forms degrade
    # to exact zeros, so only the hard range limits are enforced
    if not (1 <= k <= params.n - 1):
        raise ValueError(
            f"size parameter k={k} outside [1, n-1] = [1, {params.n - 1}]")


def mu_of(a: int, params: ModelParams, k: int) -> float:
    """Probability that a size-(k+1) set whose minimum is the a-th vertex
    spans a critical simplex."""
    _check_k(params, k)
    if a < 1:
        raise ValueError(f"minimum rank a must be >= 1, got {a}")
    rk1 = cone_prob(params, k + 1)
    rk = cone_prob(params, k)
    return span_prob(params, k + 1) * ((1.0 - rk1) ** (a - 1) - (1.0 - rk) ** (a - 1))


def critical_mean_exact(params: ModelParams, k: int) -> float:
    """Exact expectation of the count of critical size-(k+1) simplices."""
    _check_k(params, k)
    n = params.n
    rk1 = cone_prob(params, k + 1)
    rk = cone_prob(params, k)
    sp = span_prob(params, k + 1)
    total = 0.0
    for l in range(1, n - k + 1):
        total += comb(n - l, k) * ((1.0 - rk1) ** (l - 1) - (1.0 - rk) ** (l - 1))
    return sp * total


def critical_mean_bounds(params: ModelParams, k: int) -> tuple[float, float]:
    """Closed-form lower/upper bounds bracketing the exact mean.

    The upper bound is the full geometric series and is infinite when the
    top cone probability vanishes (k at the model's top dimension).
    """
    _check_k(params, k)
    n = params.n
    rk1 = cone_prob(params, k + 1)
    rk = cone_prob(params, k)
    sp = span_prob(params, k + 1)
    lower = comb(n - 2, k) * sp * (rk - rk1)
    if rk1 == 0.0:
        upper = 0.0 if sp == 0.0 else math.inf
    else:
        upper = comb(n - 1, k) * sp * (1.0 / rk1 - 1.0 / rk)
    return lower, upper


@dataclass(frozen=True)
class CriticalVariance:
    """Exact variance split into its four summation blocks.

    v1/v2 collect pairs with distinct minima (shared vs unshared second
    minimum), v3 pairs with equal minima, v4 the diagonal.
    """

    v1: float
    v2: float
    v3: float
    v4: float

    @property
    def total(self) -> float:
        return self.v1 + self.v2 + self.v3 + self.v4

    @property
    def parts(self) -> tuple[float, float, float, float]:
        return (self.v1, self.v2, self.v3, self.v4)


def _cone_ratio(params: ModelParams, top: list[tuple[int, int]]) -> float:
    """prod over terms (a, sign): cone_prob(a)^sign, via exponent arithmetic."""
    kp = params.k_prime
    hi = max(a for a, _ in top)
    exps = {i: 0 for i in range(kp + 1, hi + 1)}
    for a, sign in top:
        for i in range(kp + 1, a + 1):
            exps[i] += sign * comb(a, i)
    return _exp_product(params, exps)


def _span_ratio(params: ModelParams, top: list[tuple[int, int]]) -> float:
    kp = params.k_prime
    hi = max(a for a, _ in top)
    exps = {i: 0 for i in range(kp + 1, hi + 1)}
    for a, sign in top:
        for i in range(kp + 1, a + 1):
            exps[i] += sign * comb(a, i + 1)
    return _exp_product(params, exps)


def critical_variance_exact(params: ModelParams, k: int) -> CriticalVariance:
    """Exact finite-n variance of the critical size-(k+1) count."""
    _check_k(params, k)
    n, kp = params.n, params.k_prime
    L = n - k
    rk1 = cone_prob(params, k + 1)
    rk = cone_prob(params, k)

    lvec = np.arange(1, L + 1)
    pow_l = lvec - 1  # exponent l-1
    mu = span_prob(params, k + 1) * (
        (1.0 - rk1) ** pow_l - (1.0 - rk) ** pow_l)

    # V4: diagonal Bernoulli variances grouped by the minimum vertex
    wl_diag = np.array([comb(n - l, k) for l in range(1, L + 1)], dtype=float)
    v4 = float(wl_diag @ (mu - mu * mu))

    v1 = v2 = v3 = 0.0
    for j in range(kp + 1, k + 1):
        pref = _span_ratio(params, [(k + 1, 2), (j, -1)])
        # one-step transition bases; ratios via exponent arithmetic
        a1 = 1.0 - 2.0 * rk + _cone_ratio(params, [(k, 2), (j - 1, -1)])
        a2 = 1.0 - rk1 - rk + _cone_ratio(params, [(k + 1, 1), (k, 1), (j - 1, -1)])
        b1 = 1.0 - 2.0 * rk1 + _cone_ratio(params, [(k + 1, 2), (j, -1)])
        b2 = 1.0 - rk1 - rk + _cone_ratio(params, [(k + 1, 1), (k, 1), (j, -1)])
        a1m = 1.0 - 2.0 * rk + _cone_ratio(params, [(k, 2), (j, -1)])
        a2m = b2

        # V3: equal minima
        w3 = np.array([comb(n - l, 2 * k + 1 - j) * comb(2 * k + 1 - j, k)
                       for l in range(1, L + 1)], dtype=float) * comb(k, j - 1)
        v3 += float(w3 @ (pref * (b1 ** pow_l + a1 ** pow_l - 2.0 * a2 ** pow_l)
                          - mu * mu))

        # V1 (shared second minimum) and V2 (unshared), distinct minima l < m
        c_gap_k = 1.0 - _cone_ratio(params, [(k, 1), (j - 1, -1)])
        c_gap_km = 1.0 - _cone_ratio(params, [(k, 1), (j, -1)])
        c_gap_k1 = 1.0 - _cone_ratio(params, [(k + 1, 1), (j, -1)])
        dA = a1 ** pow_l - a2 ** pow_l
        dAm = a1m ** pow_l - a2m ** pow_l
        dB = b1 ** pow_l - b2 ** pow_l
        for q in range(1, min(k + 1, k + 1 - j, L - 1) + 1):
            top_size = 2 * k + 1 - j - q
            if top_size < k:
                continue
            wm = np.array([comb(n - m, top_size) for m in range(1, L + 1)],
                          dtype=float) * comb(top_size, k)
            if not wm.any():
                continue
            delta = np.arange(0, L)
            gap = np.where(delta >= q,
                           np.array([comb(d - 1, q - 1) if d >= 1 else 0
                                     for d in delta], dtype=float),
                           0.0)
            tau_k = np.where(delta >= q, (1.0 - rk) ** np.maximum(delta - q, 0), 0.0)
            tau_k1 = np.where(delta >= q, (1.0 - rk1) ** np.maximum(delta - q, 0), 0.0)
            # grids over (l, m = l + delta)
            midx = lvec[:, None] + delta[None, :]  # value of m
            valid = (delta[None, :] >= q) & (midx <= L)
            msafe = np.minimum(midx, L) - 1
            wmat = np.where(valid, wm[msafe] * gap[None, :], 0.0)
            mumat = np.where(valid, mu[msafe], 0.0)
            s_mu = float(np.einsum("ld,l,ld->", wmat, mu, mumat))
            gk = float((wmat * tau_k[None, :]).sum(axis=1) @ dA)
            gkm = float((wmat * tau_k[None, :]).sum(axis=1) @ dAm)
            gk1 = float((wmat * tau_k1[None, :]).sum(axis=1) @ dB)
            tauq_k = c_gap_k ** q
            tauq_km = c_gap_km ** q
            tauq_k1 = c_gap_k1 ** q
            v1 += 2.0 * comb(k, j - 1) * (
                pref * (tauq_k * gk + tauq_k1 * gk1) - s_mu)
            v2 += 2.0 * comb(k, j) * (
                pref * (tauq_km * gkm + tauq_k1 * gk1) - s_mu)
    return CriticalVariance(v1, v2, v3, v4)


def limiting_covariance(params: ModelParams, i: int, j: int) -> float:
    """Limiting correlation of standardized critical counts in dimensions
    k'+i and k'+j; 1 on the diagonal by normalisation."""
    kp, d = params.k_prime, params.d
    if i > j:
        i, j = j, i
    if i < 1 or kp + j > max(d, kp + 1):
        raise ValueError(
            f"component indices ({i}, {j}) outside the model range (k', d] = ({kp}, {d}]")
    if i == j:
        return 1.0
    k = kp + i
    r = kp + j
    rk = cone_prob(params, k + 1)
    rr = cone_prob(params, r + 1)
    rp = cone_prob(params, kp + 1)
    num = rk * rr * math.sqrt(
        (2.0 - rk) * (2.0 - rr)
        * (2.0 - _cone_ratio(params, [(k + 1, 1), (kp + 1, -1)]))
        * (2.0 - _cone_ratio(params, [(r + 1, 1), (kp + 1, -1)])))
    den = ((rk + rr - _cone_ratio(params, [(k + 1, 1), (r + 1, 1), (kp + 1, -1)]))
           * (rk + rr - rk * rr))
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return num / den


def limiting_covariance_upper_bound(params: ModelParams, i: int, j: int) -> float:
    """4*rho*rho' / (rho + rho')^2, the off-diagonal cap; below 1 whenever the
    two cone probabilities differ."""
    kp = params.k_prime
    rk = cone_prob(params, kp + i + 1)
    rr = cone_prob(params, kp + j + 1)
    if rk + rr == 0.0:
        return 1.0
    return 4.0 * rk * rr / (rk + rr) ** 2


def limiting_correlation_matrix(params: ModelParams, dims: list[int]) -> np.ndarray:
    """Matrix of limiting correlations for the given component dimensions."""
    kp = params.k_prime
    size = len(dims)
    out = np.eye(size)
    for a in range(size):
        for b in range(a + 1, size):
            out[a, b] = out[b, a] = limiting_covariance(
                params, dims[a] - kp, dims[b] - kp)
    return out


def mle_scaling(params: ModelParams, i: int) -> tuple[float, float]:
    """Standardisation for the i-th estimated probability: returns
    (sqrt(C(n,i+1) * hollow_prob(i)), p_i * (1 - p_i))."""
    if not (1 <= i <= max(params.d, 1)):
        raise ValueError(f"index {i} outside [1, d={params.d}]")
    scale = math.sqrt(comb(params.n, i + 1) * hollow_prob(params, i))
    pi = _pget(params, i)
    return scale, pi * (1.0 - pi)


@dataclass(frozen=True)
class MomentReport:
    """Mean, bounds, variance breakdown and the limiting correlation matrix."""

    k: int
    mean: float
    mean_bounds: tuple[float, float]
    variance: CriticalVariance
    sigma_inf: tuple[tuple[float, ...], ...]

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "mean": self.mean,
            "mean_lower": self.mean_bounds[0],
            "mean_upper": self.mean_bounds[1],
            "variance": self.variance.total,
            "V": list(self.variance.parts),
            "sigma_inf": [list(row) for row in self.sigma_inf],
        }


def critical_moment_report(params: ModelParams, k: int) -> MomentReport:
    kp, d = params.k_prime, params.d
    dims = list(range(kp + 1, max(d, kp + 1) + 1))
    sigma = limiting_correlation_matrix(params, dims)
    var = critical_variance_exact(params, k)
    scale = max(1.0, abs(var.v1) + abs(var.v2) + abs(var.v3) + abs(var.v4))
    if __debug__ and var.total < -1e-9 * scale:
        raise AssertionError(f"negative variance {var.total} for k={k}")
    return MomentReport(
        k=k,
        mean=critical_mean_exact(params, k),
        mean_bounds=critical_mean_bounds(params, k),
        variance=var,
        sigma_inf=tuple(tuple(float(x) for x in row) for row in sigma),
    )
