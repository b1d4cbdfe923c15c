"""Command-line interface.

Subcommands: sample, fit, gof, critical, count, moments, sweep, verify.
Exit codes: 0 on success, 2 on parse/config errors, 3 when a sweep is
dominated by inconclusive replicates (more than 10%).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .complexes import SimplicialComplex
from .harness import (
    MODEL_DEFS,
    SweepSpec,
    default_grid,
    default_verification,
    run_sweep,
    sweep_rows_to_csv,
)
from .inference import gof_critical, gof_triangle, mle_fit
from .models import (
    EDGE_MODEL_THRESHOLD,
    ModelParams,
    Seed,
    calibrate_edge_threshold,
    sample_multiparameter,
    sample_soft_geometric,
)
from .moments import critical_moment_report
from .morse import critical_counts
from .patterns import PatternComplex, count_subcomplexes, exact_covariance, expected_count
from .textio import ComplexParseError, dump_complex, dumps_complex, load_complex


class CliError(Exception):
    """Configuration problem; reported on stderr with exit code 2."""


def _parse_probs(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise CliError(f"bad probability vector {text!r}; expected e.g. 0.5,0.5") from None


def _emit(args, payload: dict | str) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str) -> SimplicialComplex:
    try:
        return load_complex(path)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    except ComplexParseError as exc:
        raise CliError(f"{path}: {exc}") from None


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SGOF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"bad SGOF_THREADS value {env!r}") from None
    return 1


def _cmd_sample(args) -> int:
    reps = args.reps
    if reps > 1 and not args.out:
        raise CliError("--reps > 1 needs --out PREFIX (one file per replicate)")
    for rep in range(reps):
        seed = Seed(args.seed, rep)
        if args.model == "xnp":
            if args.p is None or args.n is None:
                raise CliError("--model xnp needs --n and --p")
            params = ModelParams(args.n, _parse_probs(args.p))
            K = sample_multiparameter(params, seed)
        else:
            mdef = MODEL_DEFS[args.model]
            n = args.n if args.n is not None else mdef.cloud_size
            dim = args.ambient_dim if args.ambient_dim is not None else mdef.ambient_dim
            grid = default_grid(args.model)
            eps1 = args.eps1 if args.eps1 is not None else grid[-1][0]
            eps2 = args.eps2 if args.eps2 is not None else grid[-1][1]
            if args.calibrate_density:
                if args.model != "edge":
                    raise CliError("--calibrate-density applies to the edge model only")
                r = calibrate_edge_threshold(dim, seed=Seed(args.seed))
                sys.stderr.write(
                    f"calibrated edge threshold {r:.6f} "
                    f"(named constant is {EDGE_MODEL_THRESHOLD})\n")
                eps1 = eps2 = r
            _, K = sample_soft_geometric(n, dim, mdef.kernel(eps1, eps2), seed)
        if reps == 1:
            if args.out:
                dump_complex(K, args.out)
            else:
                sys.stdout.write(dumps_complex(K))
        else:
            dump_complex(K, f"{args.out}_rep{rep:04d}.txt")
    return 0


def _cmd_fit(args) -> int:
    K = _load(args.infile)
    fit = mle_fit(K, args.d)
    _emit(args, {
        "n": K.n,
        "d": args.d,
        "p_hat": list(fit.p_hat),
        "i_observed": fit.i_observed,
        "s": list(fit.counts.s),
        "h": list(fit.counts.h),
    })
    return 0


def _cmd_gof(args) -> int:
    K = _load(args.infile)
    if args.statistic == "critical":
        res = gof_critical(K, args.d, args.alpha, args.k_prime, args.diagonal_sigma)
    else:
        res = gof_triangle(K, args.d, args.alpha, args.k_prime)
    _emit(args, res.as_dict())
    return 0


def _cmd_critical(args) -> int:
    K = _load(args.infile)
    counts = critical_counts(K, args.max_size)
    _emit(args, {
        "c": list(counts.by_size),
        "euler": K.euler_characteristic(),
        "total_simplices": list(K.size_counts()),
    })
    return 0


def _cmd_count(args) -> int:
    K = _load(args.infile)
    pat = _load(args.pattern)
    try:
        pattern = PatternComplex(pat)
    except ValueError as exc:
        raise CliError(f"{args.pattern}: {exc}") from None
    payload: dict = {"count": count_subcomplexes(K, pattern)}
    if args.params:
        params = ModelParams(K.n, _parse_probs(args.params))
        payload["expected"] = expected_count(pattern, params)
        payload["variance"] = exact_covariance(pattern, pattern, params)
    _emit(args, payload)
    return 0


def _cmd_moments(args) -> int:
    params = ModelParams(args.n, _parse_probs(args.p))
    try:
        report = critical_moment_report(params, args.k)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(args, report.as_dict())
    return 0


def _cmd_sweep(args) -> int:
    if args.grid:
        try:
            raw = json.loads(Path(args.grid).read_text(encoding="utf-8"))
            grid = tuple((float(a), float(b)) for a, b in raw)
        except (OSError, ValueError, TypeError) as exc:
            raise CliError(f"bad grid file {args.grid}: {exc}") from None
    else:
        grid = tuple(default_grid(args.model))
    try:
        spec = SweepSpec(
            model=args.model,
            grid=grid,
            reps=args.reps,
            alpha=args.alpha,
            seed=Seed(args.seed),
            statistics=tuple(args.statistics.split(",")),
            threads=_threads(args),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    rows = run_sweep(spec)
    if args.format == "json":
        _emit(args, {"rows": rows})
    else:
        _emit(args, sweep_rows_to_csv(rows))
    total = sum(r["inconclusive"] for r in rows)
    budget = sum(r["reps"] for r in rows)
    if budget and total / budget > 0.10:
        sys.stderr.write(f"warning: {total}/{budget} replicates inconclusive\n")
        return 3
    return 0


def _cmd_verify(args) -> int:
    report = default_verification(reps=args.reps, seed=Seed(args.seed))
    _emit(args, report.as_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randcomplex",
        description="Random simplicial complexes: sampling, critical-simplex "
                    "statistics and goodness-of-fit testing.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (SGOF_THREADS as fallback, default 1)")

    p = sub.add_parser("sample", help="draw complexes from a model")
    common(p)
    p.add_argument("--model", choices=("xnp", *MODEL_DEFS), default="xnp")
    p.add_argument("--n", type=int, default=None, help="vertex count")
    p.add_argument("--p", help="comma-separated inclusion probabilities (xnp)")
    p.add_argument("--ambient-dim", type=int, default=None)
    p.add_argument("--eps1", type=float, default=None)
    p.add_argument("--eps2", type=float, default=None)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--calibrate-density", action="store_true",
                   help="recompute the edge-model threshold by Monte Carlo")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("fit", help="maximum-likelihood parameter estimates")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--d", type=int, required=True, help="model dimension")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("gof", help="goodness-of-fit test")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k-prime", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--statistic", choices=("critical", "triangle"), default="critical")
    p.add_argument("--diagonal-sigma", action="store_true",
                   help="force identity off-diagonals in the quadratic form")
    p.set_defaults(func=_cmd_gof)

    p = sub.add_parser("critical", help="critical-simplex counts")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.set_defaults(func=_cmd_critical)

    p = sub.add_parser("count", help="subcomplex pattern count")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--pattern", required=True, help="pattern file, same text format")
    p.add_argument("--params", help="model probabilities for expectation/variance")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("moments", help="closed-form critical-count moments")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("sweep", help="interpolation sweep of the GoF test")
    common(p)
    p.add_argument("--model", choices=tuple(MODEL_DEFS), required=True)
    p.add_argument("--grid", help="JSON file with [eps1, eps2] pairs (default: shipped grid)")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--statistics", default="critical",
                   help="comma-separated subset of critical,triangle")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="Monte-Carlo verification of the formulas")
    common(p)
    p.add_argument("--reps", type=int, default=2000)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
