"""Reproducible experiment runner: interpolation sweeps and Monte-Carlo
verification of the closed-form moments and normal approximations.

Per-replicate seeds are derived from (master, grid index, replicate), so
pass counts are independent of worker scheduling and exchangeable with
manual single-replicate runs.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from math import sqrt
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .complexes import SimplicialComplex
from .inference import gof_critical, gof_triangle
from .models import (
    GeometricKernel,
    ModelParams,
    Seed,
    edge_model_kernel,
    sample_multiparameter,
    sample_soft_geometric,
    tetrahedron_model_kernel,
    triangle_model_kernel,
)
from .moments import (
    cone_prob,
    critical_mean_exact,
    critical_variance_exact,
    hollow_prob,
    limiting_covariance,
    mle_scaling,
)
from .morse import critical_counts


@dataclass(frozen=True)
class GeometricModelDef:
    """One of the interpolation families: fixed size, ambient dimension,
    kernel builder, and the model dimension used when testing."""

    name: str
    cloud_size: int
    ambient_dim: int
    kernel: Callable[[float, float], GeometricKernel]
    test_dim: int


MODEL_DEFS: dict[str, GeometricModelDef] = {
    "tetra": GeometricModelDef("tetra", 150, 7, tetrahedron_model_kernel, 3),
    "tri": GeometricModelDef("tri", 75, 3, triangle_model_kernel, 2),
    "edge": GeometricModelDef("edge", 75, 3, edge_model_kernel, 3),
}


def default_grid(model: str) -> list[tuple[float, float]]:
    """The shipped (eps1, eps2) interpolation schedule for a model."""
    text = resources.files("randcomplex").joinpath("data/sweep_grids.json").read_text()
    grids = json.loads(text)
    if model not in grids:
        raise KeyError(f"no default grid for model {model!r}")
    return [(float(a), float(b)) for a, b in grids[model]]


@dataclass(frozen=True)
class SweepSpec:
    model: str
    grid: tuple[tuple[float, float], ...]
    reps: int = 50
    alpha: float = 0.05
    seed: Seed = Seed(0)
    statistics: tuple[str, ...] = ("critical",)
    threads: int = 1

    def __post_init__(self):
        if self.model not in MODEL_DEFS:
            raise ValueError(f"unknown model {self.model!r}; choose from {sorted(MODEL_DEFS)}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        for e1, e2 in self.grid:
            if not (0.0 <= e1 <= e2):
                raise ValueError(f"grid point ({e1}, {e2}) violates 0 <= eps1 <= eps2")
        for s in self.statistics:
            if s not in ("critical", "triangle"):
                raise ValueError(f"unknown statistic {s!r}")


def replicate_seed(spec: SweepSpec, grid_index: int, rep: int) -> Seed:
    """Seed for one replicate of one grid point; reported in sweep output."""
    return Seed(spec.seed.master, grid_index * spec.reps + rep)


def _run_replicate(args) -> tuple[int, int, dict[str, tuple[bool, bool]]]:
    (model, e1, e2, alpha, statistics, master, reps, grid_index, rep) = args
    mdef = MODEL_DEFS[model]
    seed = Seed(master, grid_index * reps + rep)
    _, K = sample_soft_geometric(mdef.cloud_size, mdef.ambient_dim,
                                 mdef.kernel(e1, e2), seed)
    out: dict[str, tuple[bool, bool]] = {}
    for statistic in statistics:
        if statistic == "critical":
            res = gof_critical(K, mdef.test_dim, alpha)
        else:
            res = gof_triangle(K, max(mdef.test_dim, 2), alpha)
        out[statistic] = (not res.reject and not res.inconclusive, res.inconclusive)
    return grid_index, rep, out


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Pass counts per grid point per statistic.

    Output rows carry the exact (eps1, eps2, reps, seed, grid_index)
    provenance needed to reproduce them; inconclusive replicates are
    tallied separately, never silently dropped.
    """
    jobs = [
        (spec.model, e1, e2, spec.alpha, spec.statistics,
         spec.seed.master, spec.reps, gi, rep)
        for gi, (e1, e2) in enumerate(spec.grid)
        for rep in range(spec.reps)
    ]
    if spec.threads > 1:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            results = list(pool.map(_run_replicate, jobs, chunksize=4))
    else:
        results = [_run_replicate(j) for j in jobs]
    passes: dict[tuple[int, str], int] = {}
    inconclusive: dict[tuple[int, str], int] = {}
    for grid_index, _rep, per_stat in results:
        for statistic, (passed, inc) in per_stat.items():
            key = (grid_index, statistic)
            passes[key] = passes.get(key, 0) + int(passed)
            inconclusive[key] = inconclusive.get(key, 0) + int(inc)
    rows = []
    for gi, (e1, e2) in enumerate(spec.grid):
        for statistic in spec.statistics:
            rows.append({
                "eps1": e1,
                "eps2": e2,
                "statistic": statistic,
                "passes": passes.get((gi, statistic), 0),
                "inconclusive": inconclusive.get((gi, statistic), 0),
                "reps": spec.reps,
                "seed": spec.seed.master,
                "grid_index": gi,
            })
    return rows


def sweep_rows_to_csv(rows: Sequence[dict]) -> str:
    header = ["eps1", "eps2", "statistic", "passes", "inconclusive",
              "reps", "seed", "grid_index"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(row[h]) if isinstance(row[h], float) else str(row[h])
                              for h in header))
    return "\n".join(lines) + "\n"


# -- Monte-Carlo verification --------------------------------------------------


@dataclass(frozen=True)
class VerificationEntry:
    name: str
    formula_value: float
    mc_estimate: float
    mc_stderr: float

    @property
    def z_score(self) -> float:
        if self.mc_stderr == 0.0:
            return 0.0 if self.mc_estimate == self.formula_value else float("inf")
        return (self.mc_estimate - self.formula_value) / self.mc_stderr

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "formula_value": self.formula_value,
            "mc_estimate": self.mc_estimate,
            "mc_stderr": self.mc_stderr,
            "z_score": self.z_score,
        }


@dataclass(frozen=True)
class VerificationReport:
    entries: tuple[VerificationEntry, ...]
    ks: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "targets": [e.as_dict() for e in self.entries],
            "ks": dict(self.ks),
        }


def _sample_critical(params: ModelParams, sizes: Sequence[int],
                     reps: int, seed: Seed) -> np.ndarray:
    out = np.empty((reps, len(sizes)), dtype=np.int64)
    max_size = max(sizes)
    for r in range(reps):
        K = sample_multiparameter(params, Seed(seed.master, seed.replicate_index + r))
        counts = critical_counts(K, max_size).by_size
        out[r] = [counts[s - 1] for s in sizes]
    return out


def variance_stderr(sample: np.ndarray) -> float:
    """Standard error of the unbiased sample variance."""
    n = sample.shape[0]
    x = sample - sample.mean()
    m2 = float(np.mean(x ** 2))
    m4 = float(np.mean(x ** 4))
    v = m4 - m2 * m2 * (n - 3) / (n - 1)
    return sqrt(max(v, 0.0) / n)


def verify_critical_moments(params: ModelParams, k: int, reps: int,
                            seed: Seed) -> list[VerificationEntry]:
    """Compare the exact mean and variance of one critical count to MC."""
    sample = _sample_critical(params, [k + 1], reps, seed)[:, 0].astype(float)
    mean_f = critical_mean_exact(params, k)
    var_f = critical_variance_exact(params, k).total
    label = f"n={params.n},p={params.p},k={k}"
    return [
        VerificationEntry(f"critical_mean[{label}]", mean_f,
                          float(sample.mean()),
                          float(sample.std(ddof=1) / sqrt(reps))),
        VerificationEntry(f"critical_variance[{label}]", var_f,
                          float(sample.var(ddof=1)),
                          variance_stderr(sample)),
    ]


def verify_limiting_correlation(params: ModelParams, i: int, j: int, reps: int,
                                seed: Seed) -> VerificationEntry:
    """Empirical correlation of two standardized critical counts vs formula."""
    kp = params.k_prime
    sizes = [kp + i + 1, kp + j + 1]
    sample = _sample_critical(params, sizes, reps, seed).astype(float)
    corr = float(np.corrcoef(sample[:, 0], sample[:, 1])[0, 1])
    formula = limiting_covariance(params, i, j)
    stderr = (1.0 - corr * corr) / sqrt(reps)  # first-order correlation SE
    return VerificationEntry(
        f"sigma_inf[n={params.n},p={params.p},({i},{j})]", formula, corr, stderr)


def standardized_critical_ks(params: ModelParams, k: int, reps: int,
                             seed: Seed) -> float:
    """KS distance of the standardized critical count to the standard normal."""
    sample = _sample_critical(params, [k + 1], reps, seed)[:, 0].astype(float)
    mean = critical_mean_exact(params, k)
    sd = sqrt(critical_variance_exact(params, k).total)
    return float(stats.kstest((sample - mean) / sd, "norm").statistic)


def verify_mle(params: ModelParams, reps: int, seed: Seed) -> tuple[
        list[VerificationEntry], dict[str, float]]:
    """Bias entries for every estimated probability plus standardized KS
    distances for dimensions above the first."""
    from .inference import mle_fit

    d = params.d
    hats = np.empty((reps, d))
    for r in range(reps):
        K = sample_multiparameter(params, Seed(seed.master, seed.replicate_index + r))
        hats[r] = mle_fit(K, d).p_hat
    entries = []
    ks: dict[str, float] = {}
    for i in range(1, d + 1):
        col = hats[:, i - 1]
        entries.append(VerificationEntry(
            f"mle_bias[n={params.n},p={params.p},i={i}]",
            params.prob(i), float(col.mean()),
            float(col.std(ddof=1) / sqrt(reps))))
        scale, limit_var = mle_scaling(params, i)
        if limit_var > 0.0:
            w = scale * (col - params.prob(i)) / sqrt(limit_var)
            ks[f"mle_w[{i}]"] = float(stats.kstest(w, "norm").statistic)
    return entries, ks


def default_verification(reps: int = 2000, seed: Seed = Seed(2024)) -> VerificationReport:
    """The stock verification bundle: a critical mean/variance target, the
    (1,2) limiting correlation, and one standardized-count KS distance."""
    entries: list[VerificationEntry] = []
    p_small = ModelParams(10, (0.5, 0.5))
    entries += verify_critical_moments(p_small, 1, reps, seed)
    p_big = ModelParams(100, (0.5, 0.5, 0.5, 0.5))
    entries.append(verify_limiting_correlation(p_big, 1, 2, min(reps, 2000),
                                               Seed(seed.master, 10_000_000)))
    ks = {
        "critical_w[n=100,k=1]": standardized_critical_ks(
            p_big, 1, min(reps, 2000), Seed(seed.master, 20_000_000)),
    }
    return VerificationReport(tuple(entries), ks)
