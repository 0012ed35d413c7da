"""Command-line surface: point/grid evaluation, renewal pmf, bench, export.

Exit codes: 0 success, 2 usage/validation error, 3 numerical
non-convergence, 4 approximation fit failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import barnabani, bench, mathai, moschopoulos, renewal
from .errors import ConvergenceError, DomainError, FitFailureError
from .model import ConvolutionSpec, MixtureExpSpec, canonicalize, validate_mixture
from .specfun import SeriesControl

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_FIT_FAILURE = 4


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _grid_spec(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return np.linspace(lo, hi, count)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gammaconv",
        description="Gamma-convolution densities/CDFs and renewal count pmfs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate density or cdf at points")
    p_eval.add_argument("quantity", choices=["density", "cdf"])
    p_eval.add_argument("--shape", type=_float_list, required=True)
    p_eval.add_argument("--scale", type=_float_list, required=True)
    group = p_eval.add_mutually_exclusive_group(required=True)
    group.add_argument("--at", type=_float_list)
    group.add_argument("--grid", type=_grid_spec)
    p_eval.add_argument(
        "--method",
        choices=["mathai", "moschopoulos", "approx", "auto"],
        default="auto",
    )
    p_eval.add_argument("--tol", type=float, default=None)
    p_eval.add_argument("--max-terms", type=int, default=None)
    p_eval.add_argument("--format", choices=["csv", "json"], default="csv")

    p_renew = sub.add_parser("renewal", help="renewal count pmf Pr(N(t) = n)")
    p_renew.add_argument("--weights", type=_float_list, required=True)
    p_renew.add_argument("--scales", type=_float_list, required=True)
    p_renew.add_argument("--t", type=float, required=True)
    p_renew.add_argument("--n", type=_int_list, required=True)
    p_renew.add_argument(
        "--method",
        choices=["proposition", "raw-mathai", "raw-moschopoulos", "approx"],
        default="proposition",
    )

    p_bench = sub.add_parser("bench", help="timing suites over the built-in benchmark settings")
    p_bench.add_argument(
        "--suite", choices=["coga2", "coga3", "renew2", "renew3"], required=True
    )
    p_bench.add_argument("--replicates", type=int, default=10)
    p_bench.add_argument("--samples", type=int, default=100_000)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--out", type=str, default=None)

    p_fig = sub.add_parser(
        "figure-error", help="approximation-vs-exact differences over a bulk grid"
    )
    p_fig.add_argument("--setup", type=int, required=True)
    p_fig.add_argument("--out", type=str, default=None)
    p_fig.add_argument("--seed", type=int, default=None)

    sub.add_parser("selftest", help="reduced-scale consistency checks")
    return parser


def _eval_control(args) -> SeriesControl | None:
    if args.tol is None and args.max_terms is None:
        return None
    return SeriesControl(
        rel_tol=args.tol if args.tol is not None else 1e-15,
        max_terms=args.max_terms if args.max_terms is not None else 10_000,
    )


def _pick_method(method: str, n: int) -> str:
    if method != "auto":
        return method
    return "mathai" if n <= 2 else "moschopoulos"


def _cmd_eval(args) -> int:
    if len(args.shape) != len(args.scale):
        print(
            f"error: {len(args.shape)} shapes but {len(args.scale)} scales",
            file=sys.stderr,
        )
        return EXIT_USAGE
    spec = canonicalize(ConvolutionSpec.of(*zip(args.shape, args.scale)))
    ctrl = _eval_control(args)
    method = _pick_method(args.method, len(spec))
    points = args.at if args.at is not None else list(args.grid)

    fns = {
        ("density", "mathai"): lambda x: (
            mathai.density2(spec, x, ctrl or mathai.DEFAULT_CONTROL)
            if len(spec) <= 2
            else mathai.density_n(spec, x, ctrl)
        ),
        ("cdf", "mathai"): lambda y: (
            mathai.cdf2(spec, y, ctrl or mathai.DEFAULT_CONTROL)
            if len(spec) <= 2
            else mathai.cdf_n(spec, y, ctrl)
        ),
        ("density", "moschopoulos"): lambda x: moschopoulos.density(
            spec, x, ctrl or mathai.DEFAULT_CONTROL
        ),
        ("cdf", "moschopoulos"): lambda y: moschopoulos.cdf(
            spec, y, ctrl or mathai.DEFAULT_CONTROL
        ),
        ("density", "approx"): lambda x: barnabani.density_approx(
            spec, x, ctrl or barnabani.CONTROL_APPROX
        ),
        ("cdf", "approx"): lambda y: barnabani.cdf_approx(
            spec, y, ctrl or barnabani.CONTROL_APPROX
        ),
    }
    fn = fns[(args.quantity, method)]

    rows = []
    for point in points:
        start = time.perf_counter_ns()
        result = fn(float(point))
        elapsed = time.perf_counter_ns() - start
        rows.append(
            {
                "point": float(point),
                "value": result.value,
                "terms_used": result.terms_used,
                "tail_bound": result.tail_bound,
                "method": method,
                "wall_time_ns": elapsed,
            }
        )
    if args.format == "json":
        print(json.dumps(rows, default=float))
    else:
        bench.write_csv(rows, sys.stdout)
    return EXIT_OK


def _cmd_renewal(args) -> int:
    mix = validate_mixture(MixtureExpSpec(tuple(args.weights), tuple(args.scales)))
    rows = []
    for n in args.n:
        q = renewal.RenewalQuery(args.t, n)
        start = time.perf_counter_ns()
        if args.method == "proposition":
            if mix.size <= 2:
                pmf = renewal.pmf_s2(mix, q)
            else:
                pmf = renewal.pmf_general(mix, q, "moschopoulos")
        elif args.method == "raw-mathai":
            pmf = (
                renewal.pmf_raw_s2(mix, q, "mathai")
                if mix.size <= 2
                else renewal.pmf_general(mix, q, "mathai")
            )
        elif args.method == "raw-moschopoulos":
            pmf = (
                renewal.pmf_raw_s2(mix, q, "moschopoulos")
                if mix.size <= 2
                else renewal.pmf_general(mix, q, "moschopoulos")
            )
        else:
            pmf = renewal.pmf_general(mix, q, "approx")
        elapsed = time.perf_counter_ns() - start
        rows.append(
            {"n": n, "pmf": pmf, "method": args.method, "wall_time_ns": elapsed}
        )
    bench.write_csv(rows, sys.stdout)
    return EXIT_OK


def _cmd_bench(args) -> int:
    rows = bench.run_suite(
        args.suite,
        replicates=args.replicates,
        n_samples=args.samples,
        seed=args.seed,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            bench.write_csv(rows, handle)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        bench.write_csv(rows, sys.stdout)
    return EXIT_OK


def _cmd_figure_error(args) -> int:
    try:
        rows = bench.figure_error_rows(args.setup, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            bench.write_csv(rows, handle)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        bench.write_csv(rows, sys.stdout)
    return EXIT_OK


def _cmd_selftest() -> int:
    from math import isclose

    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    spec2 = ConvolutionSpec.of((1.0, 1.0), (1.0, 2.0))
    d = mathai.density2(spec2, 1.0).value
    check(
        "n=2 density matches hypoexponential closed form",
        isclose(d, np.exp(-0.5) - np.exp(-1.0), rel_tol=1e-12),
    )
    check(
        "n=2 Mathai/Moschopoulos density agreement",
        isclose(d, moschopoulos.density(spec2, 1.0).value, rel_tol=1e-12),
    )
    spec3 = ConvolutionSpec.of((0.2, 4.0), (0.2, 0.3), (0.2, 0.2))
    for x in (0.3, 1.0, 3.0):
        lhs = mathai.density_n(spec3, x).value
        rhs = moschopoulos.density(spec3, x).value
        check(
            f"n=3 cross-method density agreement at x={x}",
            isclose(lhs, rhs, rel_tol=1e-10),
        )
    w = moschopoulos.build_weights(spec3, 400)
    mass = w.c * float(w.deltas.sum())
    check("weight mass near one", 1.0 - 5e-4 < mass <= 1.0 + 1e-12)
    mix = MixtureExpSpec((0.5, 0.5), (1.0, 2.0))
    q = renewal.RenewalQuery(1.0, 0)
    check(
        "renewal n=0 equals mixture survival",
        isclose(
            renewal.pmf_s2(mix, q),
            0.5 * np.exp(-1.0) + 0.5 * np.exp(-0.5),
            rel_tol=1e-12,
        ),
    )
    check(
        "proposition equals raw formula",
        isclose(
            renewal.pmf_s2(mix, renewal.RenewalQuery(1.0, 2)),
            renewal.pmf_raw_s2(mix, renewal.RenewalQuery(1.0, 2), "mathai"),
            rel_tol=1e-10,
        ),
    )
    ad = barnabani.density_approx(spec3, 1.0).value
    ed = moschopoulos.density(spec3, 1.0).value
    check("approximation close to exact", abs(ad - ed) < 1e-2)
    return EXIT_OK if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "renewal":
            return _cmd_renewal(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "figure-error":
            return _cmd_figure_error(args)
        if args.command == "selftest":
            return _cmd_selftest()
        parser.error(f"unknown command {args.command!r}")
    except ConvergenceError as exc:
        print(f"error: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except FitFailureError as exc:
        print(f"error: approximation fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT_FAILURE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
