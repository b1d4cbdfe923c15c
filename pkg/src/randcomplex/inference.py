"""Maximum-likelihood fitting and critical-count goodness-of-fit testing.

The MLE for each inclusion probability is the per-dimension success ratio
of filled over hollow simplices, with the boundary convention that an
unobservable dimension (no hollow candidates) estimates to zero.  The test
standardises observed critical counts with the plug-in exact moments and
compares the quadratic form against a chi-square quantile; estimation and
normal-approximation errors are knowingly ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from .complexes import SimplicialComplex, SkeletonCounts
from .models import ModelParams
from .moments import (
    FormulaDomainError,
    critical_mean_exact,
    critical_variance_exact,
    limiting_correlation_matrix,
)
from .morse import critical_counts

ONE_FOLD_TOLERANCE = 1e-12  # estimates >= 1 - this fold into the complete skeleton


@dataclass(frozen=True)
class MleResult:
    """Fitted inclusion probabilities with the sufficient statistics used."""

    p_hat: tuple[float, ...]
    i_observed: int
    counts: SkeletonCounts


def mle_fit(K: SimplicialComplex, d: int) -> MleResult:
    """Per-dimension ratio estimator p_hat[i] = s_i / h_i (0 when h_i = 0).

    Degenerate inputs yield boundary estimates, never errors.
    """
    if d < 1:
        raise ValueError(f"model dimension must be >= 1, got {d}")
    counts = K.skeleton_counts(d)
    p_hat = []
    for i in range(1, d + 1):
        h = counts.h[i]
        p_hat.append(counts.s[i] / h if h else 0.0)
    return MleResult(tuple(p_hat), counts.i_max, counts)


def chi_square_quantile(df: int, prob: float) -> float:
    """Inverse chi-square CDF; absolute accuracy well below 1e-8."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if not (0.0 < prob < 1.0):
        raise ValueError(f"probability {prob} outside (0, 1)")
    return float(stats.chi2.ppf(prob, df))


@dataclass(frozen=True)
class GofResult:
    """Outcome of the chi-square test; reject <=> statistic > threshold."""

    statistic: float
    df: int
    threshold: float
    reject: bool
    w: tuple[float, ...]
    sigma: tuple[tuple[float, ...], ...]
    p_hat: tuple[float, ...]
    components: tuple[int, ...]           # simplex sizes retained
    t_observed: tuple[int, ...]
    expected: tuple[float, ...]
    variances: tuple[float, ...]
    alpha: float
    statistic_name: str
    inconclusive: bool = False
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "statistic_name": self.statistic_name,
            "p_hat": list(self.p_hat),
            "components": list(self.components),
            "t": list(self.t_observed),
            "expected": list(self.expected),
            "variances": list(self.variances),
            "w": list(self.w),
            "sigma": [list(r) for r in self.sigma],
            "statistic": self.statistic,
            "df": self.df,
            "threshold": self.threshold,
            "alpha": self.alpha,
            "reject": self.reject,
            "inconclusive": self.inconclusive,
            "warnings": list(self.warnings),
        }


def _fold_p_hat(p_hat: tuple[float, ...], k_prime: int | None) -> tuple[tuple[float, ...], int]:
    """Clamp the complete low skeleton: user-supplied k' wins, otherwise any
    leading run of estimates within ONE_FOLD_TOLERANCE of 1 is folded."""
    p = list(p_hat)
    if k_prime is None:
        k_prime = 0
        for x in p:
            if x >= 1.0 - ONE_FOLD_TOLERANCE:
                k_prime += 1
            else:
                break
    if k_prime > len(p):
        raise ValueError(f"k'={k_prime} exceeds model dimension {len(p)}")
    for i in range(k_prime):
        p[i] = 1.0
    return tuple(p), k_prime


def _inconclusive(name: str, p_hat, alpha, warnings) -> GofResult:
    return GofResult(
        statistic=math.nan, df=0, threshold=math.nan, reject=False,
        w=(), sigma=(), p_hat=tuple(p_hat), components=(),
        t_observed=(), expected=(), variances=(),
        alpha=alpha, statistic_name=name, inconclusive=True,
        warnings=tuple(warnings))


def gof_critical(
    K: SimplicialComplex,
    d: int,
    alpha: float = 0.05,
    k_prime: int | None = None,
    diagonal_sigma: bool = False,
) -> GofResult:
    """Chi-square test of the multiparameter null using critical counts.

    Fits the null parameters, standardises the observed critical counts of
    sizes k'+2 .. d+1 with the plug-in exact mean/variance, and rejects when
    the quadratic form with the limiting correlation matrix exceeds the
    chi-square quantile at level alpha.  Components whose plug-in variance
    is non-positive or outside the formulas' domain are dropped with a
    recorded warning; losing every component flags the result inconclusive.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha {alpha} outside (0, 1)")
    fit = mle_fit(K, d)
    p0, kp = _fold_p_hat(fit.p_hat, k_prime)
    warnings: list[str] = []
    try:
        params = ModelParams(K.n, p0)
    except ValueError as exc:
        return _inconclusive("critical", p0, alpha, [f"invalid fitted model: {exc}"])

    observed = critical_counts(K, d + 1).by_size
    comps: list[int] = []        # dimension index k; component size is k+1
    t_obs: list[int] = []
    means: list[float] = []
    variances: list[float] = []
    first_zero = next((i for i, x in enumerate(p0, start=1) if x == 0.0), d + 1)
    for k in range(kp + 1, d + 1):
        size = k + 1
        if k > first_zero:
            warnings.append(
                f"size {size}: dropped, p_hat_{first_zero} = 0 leaves no valid formula")
            continue
        try:
            mean = critical_mean_exact(params, k)
            var = critical_variance_exact(params, k).total
        except (FormulaDomainError, ValueError) as exc:
            warnings.append(f"size {size}: dropped ({exc})")
            continue
        if not (var > 0.0) or not math.isfinite(var):
            warnings.append(f"size {size}: dropped, plug-in variance {var:.3g} <= 0")
            continue
        comps.append(k)
        t_obs.append(observed[size - 1] if size - 1 < len(observed) else 0)
        means.append(mean)
        variances.append(var)

    if not comps:
        warnings.append("all components dropped; test inconclusive")
        return _inconclusive("critical", p0, alpha, warnings)

    w = np.array([(t - m) / math.sqrt(v)
                  for t, m, v in zip(t_obs, means, variances)])
    while comps:
        if diagonal_sigma:
            sigma = np.eye(len(comps))
        else:
            sigma = limiting_correlation_matrix(params, comps)
        try:
            cho = linalg.cho_factor(sigma)
            break
        except linalg.LinAlgError:
            dropped = comps.pop()
            warnings.append(
                f"size {dropped + 1}: dropped, correlation matrix not positive definite")
            t_obs.pop(); means.pop(); variances.pop()
            w = w[:-1]
    if not comps:
        warnings.append("all components dropped; test inconclusive")
        return _inconclusive("critical", p0, alpha, warnings)

    statistic = float(w @ linalg.cho_solve(cho, w))
    df = len(comps)
    threshold = chi_square_quantile(df, 1.0 - alpha)
    return GofResult(
        statistic=statistic, df=df, threshold=threshold,
        reject=bool(statistic > threshold),
        w=tuple(float(x) for x in w),
        sigma=tuple(tuple(float(x) for x in row) for row in sigma),
        p_hat=p0, components=tuple(c + 1 for c in comps),
        t_observed=tuple(t_obs), expected=tuple(means),
        variances=tuple(variances), alpha=alpha,
        statistic_name="critical", warnings=tuple(warnings))


def gof_triangle(
    K: SimplicialComplex,
    d: int,
    alpha: float = 0.05,
    k_prime: int | None = None,
) -> GofResult:
    """Two-sided z-test of the 2-simplex count against its plug-in moments,
    expressed as a single-component chi-square."""
    from .patterns import exact_covariance, expected_count, triangle_pattern

    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha {alpha} outside (0, 1)")
    if d < 2:
        raise ValueError(f"triangle statistic needs model dimension >= 2, got {d}")
    fit = mle_fit(K, d)
    p0, kp = _fold_p_hat(fit.p_hat, k_prime)
    try:
        params = ModelParams(K.n, p0)
    except ValueError as exc:
        return _inconclusive("triangle", p0, alpha, [f"invalid fitted model: {exc}"])
    tri = triangle_pattern()
    if params.d < 2:
        return _inconclusive("triangle", p0, alpha,
                             ["no 2-simplices estimable; test inconclusive"])
    mean = expected_count(tri, params)
    var = exact_covariance(tri, tri, params)
    if not (var > 0.0):
        return _inconclusive("triangle", p0, alpha,
                             [f"plug-in variance {var:.3g} <= 0; test inconclusive"])
    observed = fit.counts.s[2]
    w = (observed - mean) / math.sqrt(var)
    statistic = w * w
    threshold = chi_square_quantile(1, 1.0 - alpha)
    return GofResult(
        statistic=float(statistic), df=1, threshold=threshold,
        reject=bool(statistic > threshold),
        w=(float(w),), sigma=((1.0,),),
        p_hat=p0, components=(3,), t_observed=(observed,),
        expected=(float(mean),), variances=(float(var),),
        alpha=alpha, statistic_name="triangle", warnings=())
