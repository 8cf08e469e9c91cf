"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad input or violated
precondition, 3 solver failure (a diagnostics file is written next to the
output).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .constructions import geometric_family, nonblaschke_family, slow_family
from .core import Parameters, ZeroSetSpec
from .errors import ConvergenceError, PInnerError, PreconditionError
from .inner import inner_function
from .io import coefs_from_json, coefs_to_json, dumps, load_zeroset, write_csv, write_json
from .projection import SolverOptions, project_shift_span
from .verify import SUITES, run_suite
from .zerosets import (
    RSequence,
    blaschke_sum,
    j_norm_sequence,
    newman_ratios,
    vinogradov_sums,
    young_product_bound,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
INNER_TOL = 1e-7


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PINNER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise PreconditionError(f"PINNER_THREADS must be an integer, got {env!r}")
    return 1


def _opts(args) -> SolverOptions:
    return SolverOptions(truncation_degree=args.degree, grad_tol=args.grad_tol, max_iters=args.max_iters)


def _emit(args, obj):
    if args.out:
        write_json(args.out, obj)
    else:
        sys.stdout.write(dumps(obj))


def _diagnostics_path(args) -> Path:
    base = Path(args.out) if args.out else Path(f"pinner-{args.command}")
    return base.with_name(base.name + ".diagnostics.json")


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read {path}: {exc}") from exc


# Commands -------------------------------------------------------------------------


def cmd_inner(args) -> int:
    W = load_zeroset(args.zeros)
    res = inner_function(W, args.p, args.method, _opts(args))
    _emit(args, res.to_json())
    scale = max(1.0, res.norm**args.p)
    return EXIT_OK if max(res.orth_residuals, default=0.0) <= INNER_TOL * scale else EXIT_VERIFY


def cmd_project(args) -> int:
    f = coefs_from_json(_load_json(args.f))
    res = project_shift_span(f, args.p, _opts(args), origin_multiplicity=args.origin_mult)
    _emit(args, res.to_json())
    return EXIT_OK


def cmd_zeroset(args) -> int:
    W = load_zeroset(args.zeros)
    if args.mode == "diag":
        return _zeroset_diag(args, W)
    n_max = len(W) if args.n_max is None else args.n_max
    cert = j_norm_sequence(W, args.p, n_max, _opts(args), threads=_threads(args))
    out = cert.to_json()
    out["p"] = args.p
    r = RSequence.default(args.p, len(W))
    bounds = [young_product_bound(W, r, args.p, n) for n in range(1, len(cert.prefix_norms) + 1)]
    out["young_bounds"] = bounds
    _emit(args, out)
    if args.csv:
        rows = zip(range(1, len(bounds) + 1), cert.prefix_norms, cert.phi_norms, bounds)
        write_csv(args.csv, ["n", "norm", "phi_norm", "bound"], rows)
    if cert.failures:
        write_json(_diagnostics_path(args), {"failures": [list(f) for f in cert.failures]})
        return EXIT_SOLVER
    return EXIT_OK


def _zeroset_diag(args, W) -> int:
    n = len(W)
    header, cols = ["n"], [list(range(1, n + 1))]
    summary = {}
    if args.blaschke:
        vals = [blaschke_sum(W, k) for k in range(1, n + 1)]
        header.append("blaschke")
        cols.append(vals)
        summary["blaschke_sum"] = vals[-1]
    if args.newman:
        ratios = [float("nan")] + newman_ratios(W).tolist() if n >= 2 else [float("nan")]
        header.append("newman_ratio")
        cols.append(ratios)
        summary["newman_sup"] = max((v for v in ratios[1:]), default=None)
    if args.vinogradov_eps is not None:
        vals = [vinogradov_sums(W, args.vinogradov_eps, k) for k in range(1, n + 1)]
        header.append("vinogradov")
        cols.append(vals)
        summary["vinogradov_sum"] = vals[-1]
    _emit(args, summary)
    if args.csv:
        write_csv(args.csv, header, zip(*cols))
    return EXIT_OK


def cmd_construct(args) -> int:
    if args.family == "slow":
        fam = slow_family(args.k_max, args.a, args.p, args.r1)
    elif args.family == "nonblaschke":
        fam = nonblaschke_family(args.p, args.alpha, args.k_max)
    else:
        moduli = args.moduli or [1.0 - 3.0**-k for k in range(1, args.k_max + 1)]
        r = RSequence.default(args.p, len(moduli))
        fam = geometric_family(moduli, r, args.p, min(args.k_max, len(moduli)), rotate=args.rotate)
    _emit(args, fam.to_json())
    if args.emit_roots:
        write_csv(args.emit_roots, ["level", "modulus", "count", "spacing"], fam.root_rows())
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = run_suite(args.suite, args.seed, args.cases, _opts(args))
    _emit(args, rep.to_json())
    return EXIT_OK if rep.passed else EXIT_VERIFY


# Parser ---------------------------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _p_value(text):
    try:
        return Parameters(float(text)).p
    except (ValueError, PreconditionError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_p_value, default=2.0, help="exponent p > 1")
    common.add_argument("--out", help="output JSON path (stdout if omitted)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", type=_positive_int, default=None, help="worker threads (env PINNER_THREADS)")
    common.add_argument("--degree", type=_positive_int, default=None, help="truncation degree")
    common.add_argument("--grad-tol", type=float, default=1e-10)
    common.add_argument("--max-iters", type=_positive_int, default=500)

    parser = argparse.ArgumentParser(prog="pinner", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inner", parents=[common], help="p-inner function of a finite zero set")
    p.add_argument("--zeros", required=True)
    p.add_argument("--method", choices=["closed", "newton", "project"], default="newton")
    p.set_defaults(func=cmd_inner)

    p = sub.add_parser("project", parents=[common], help="co-projection of f onto [Sf]")
    p.add_argument("--f", required=True, help="coefficient JSON [[re, im], ...]")
    p.add_argument("--origin-mult", type=int, default=0)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("zeroset", parents=[common], help="prefix certificate or classical diagnostics")
    p.add_argument("mode", nargs="?", choices=["diag"], help="'diag' for Blaschke/Newman/Vinogradov columns")
    p.add_argument("--zeros", required=True)
    p.add_argument("--n-max", type=_positive_int, default=None)
    p.add_argument("--csv", help="CSV table path")
    p.add_argument("--blaschke", action="store_true")
    p.add_argument("--newman", action="store_true")
    p.add_argument("--vinogradov-eps", type=float, default=None)
    p.set_defaults(func=cmd_zeroset)

    p = sub.add_parser("construct", parents=[common], help="build an explicit zero-set family")
    p.add_argument("--family", choices=["geometric", "slow", "nonblaschke"], required=True)
    p.add_argument("--k-max", type=_positive_int, default=6)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--r1", type=float, default=0.5)
    p.add_argument("--moduli", type=float, nargs="+", help="geometric family moduli")
    p.add_argument("--rotate", action="store_true", help="use B(z**k) factors")
    p.add_argument("--emit-roots", help="CSV of targeted-root summaries")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="seeded invariant suites")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--cases", type=_positive_int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        diag = {
            "error": str(exc),
            "residual": exc.residual,
            "iterations": exc.iterations,
            "last_iterate": coefs_to_json(np.atleast_1d(exc.last_iterate)) if exc.last_iterate is not None else None,
        }
        path = _diagnostics_path(args)
        write_json(path, diag)
        print(f"pinner: solver failure: {exc} (diagnostics in {path})", file=sys.stderr)
        return EXIT_SOLVER
    except (PreconditionError, OverflowError, ValueError) as exc:
        print(f"pinner: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PInnerError as exc:
        print(f"pinner: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
