"""Command-line front end.

Every subcommand writes CSV or JSON to ``--output``, to
``$CKANNULUS_OUTPUT_DIR/<default name>`` when that variable is set, or to
standard output.  Exit codes: 0 success, 1 a verification report came out
false, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import contradiction, density, foliation, io, modulus, spin, verify
from .annulus import (
    AnnulusSpec,
    caratheodory_core_simha,
    kobayashi_core,
    metric_ratio_core,
    poincare_annulus,
    ratio_curve,
    simha_quotient,
    StripPoint,
)
from .errors import DomainError, SlowConvergenceError, VerificationFailure

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _emit(args, text: str, name: str) -> None:
    io.emit(text, args.output, f"{name}.{args.format}")


def _records(args, header, rows, name):
    text = io.to_csv(header, rows) if args.format == "csv" else io.to_json(io.table_to_records(header, rows))
    _emit(args, text, name)


def _single(args, record: dict, name: str):
    if args.format == "csv":
        text = io.to_csv(tuple(record), [tuple(record.values())])
    else:
        text = io.to_json(record)
    _emit(args, text, name)


# -- subcommands ------------------------------------------------------------------------


def cmd_metrics(args) -> int:
    a = AnnulusSpec(args.r)
    q = simha_quotient(a)
    record = {
        "r": a.r,
        "caratheodory": caratheodory_core_simha(a),
        "kobayashi": kobayashi_core(a),
        "ratio": metric_ratio_core(a),
        "poincare": poincare_annulus(a, StripPoint(0.0, 0.0)),
        "product_terms": q.terms,
        "product_bound": q.bound,
    }
    _single(args, record, "metrics")
    return EXIT_OK


def cmd_ratio_curve(args) -> int:
    curve = ratio_curve(args.r_min, args.r_max, args.steps)
    _emit(args, curve.to_csv() if args.format == "csv" else curve.to_json(), "ratio_curve")
    if not curve.strictly_decreasing():
        print("ratio is not strictly decreasing", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_spin_bounds(args) -> int:
    ts = args.t or list(np.linspace(args.t_min, args.t_max, args.t_steps))
    rows = spin.bounds_table(ts, args.r)
    _records(args, spin.BOUNDS_HEADER, rows, "spin_bounds")
    bad = [row for row in rows if not row.lower <= row.upper]
    if bad:
        print(f"lower > upper in {len(bad)} of {len(rows)} rows (first at t={bad[0].t!r}, r={bad[0].r!r})",
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_cs_check(args) -> int:
    a = AnnulusSpec(args.r)
    nx, ny = args.grid
    p = spin.SpinParams(args.t, a)
    pairs = [("sheared", foliation.sheared_xi(p, nx, ny), foliation.sheared_eta(p, nx, ny))]
    rng = np.random.default_rng(args.seed)
    for k in range(args.random):
        pairs.append((f"random_{k}", foliation.random_smooth_foliation(a, nx, ny, rng),
                      foliation.random_smooth_foliation(a, nx, ny, rng)))
    header = ("pair", "lhs_squared", "rhs", "holds")
    rows = []
    for name, u, v in pairs:
        rep = foliation.cauchy_schwarz_check(u, v, a, margin=args.margin)
        rows.append((name, rep.lhs_squared, rep.rhs, rep.holds))
    _records(args, header, rows, "cs_check")
    return EXIT_OK if all(row[3] for row in rows) else EXIT_FAIL


def cmd_modulus(args) -> int:
    a = AnnulusSpec(args.r)
    nx, ny = args.grid
    if args.audit:
        rep = modulus.paper_bound_audit(args.t, a, (nx, ny), args.shear, args.tol, args.mu_cap)
        _single(args, rep.to_dict(), "modulus_audit")
        return EXIT_OK
    mu = spin.spin_beltrami_field(spin.SpinParams(args.t, a), nx, ny) if args.t else None
    shear = args.t if args.shear is None else args.shear
    prob = modulus.SolverProblem(a, mu, args.mode, shear if args.mode == "pinned" else 0.0, (nx, ny), args.tol,
                                 args.max_iters, args.mu_cap)
    if args.convergence:
        table = modulus.convergence_study(prob, args.convergence)
        if args.format == "csv":
            _emit(args, table.to_csv(), "convergence")
        else:
            _emit(args, io.to_json({"rows": io.table_to_records(table.CSV_HEADER, table.rows()),
                                    "observed_order": table.observed_order,
                                    "extrapolated": table.extrapolated}), "convergence")
        return EXIT_OK
    res = modulus.solve_modulus(prob)
    _single(args, res.to_dict(prob, args.t), "modulus")
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_density(args) -> int:
    a = AnnulusSpec(args.r)
    br = density.sandwich_report(a, args.p, args.N, grid=tuple(args.grid), tol=args.tol, strict=False)
    _single(args, br.to_dict(), "density")
    return EXIT_OK if br.passed else EXIT_FAIL


def cmd_contradiction(args) -> int:
    a = AnnulusSpec(args.r)
    rows = contradiction.ledger(a, args.n_max)
    idx = {w: contradiction.crossing_index(a, w) for w in ("201", "above")}
    if args.format == "csv":
        _emit(args, contradiction.ledger_csv(rows), "contradiction")
    else:
        _emit(args, io.to_json({"crossing_index": idx,
                                "rows": io.table_to_records(contradiction.LEDGER_HEADER, rows)}), "contradiction")
    print(f"crossing index: 201 -> {idx['201']}, above -> {idx['above']}", file=sys.stderr)
    return EXIT_OK


def cmd_verify_all(args) -> int:
    checks = verify.run_all(quick=not args.full)
    _records(args, verify.CHECK_HEADER, checks, "verify_all")
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}", file=sys.stderr)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


# -- parser -----------------------------------------------------------------------------


def _add_output(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ckannulus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="core densities and their ratio")
    p.add_argument("--r", type=float, required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("ratio-curve", help="C/K on the core against r")
    p.add_argument("--r-min", type=float, default=1.05)
    p.add_argument("--r-max", type=float, default=100.0)
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(func=cmd_ratio_curve)

    p = sub.add_parser("spin-bounds", help="bounds for log r(t) / log r")
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--t-min", type=float, default=3 * math.pi)
    p.add_argument("--t-max", type=float, default=100 * math.pi)
    p.add_argument("--t-steps", type=int, default=20)
    p.add_argument("--r", type=float, nargs="+", default=[math.e])
    p.set_defaults(func=cmd_spin_bounds)

    p = sub.add_parser("cs-check", help="Cauchy-Schwarz inequality for foliation pairs")
    p.add_argument("--r", type=float, default=math.e)
    p.add_argument("--t", type=float, default=4 * math.pi)
    p.add_argument("--grid", type=int, nargs=2, default=(256, 256), metavar=("NX", "NY"))
    p.add_argument("--random", type=int, default=20, help="number of random smooth pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=float, default=0.01)
    p.set_defaults(func=cmd_cs_check)

    p = sub.add_parser("modulus", help="modulus of the annulus with the spin structure")
    p.add_argument("--r", type=float, default=math.e)
    p.add_argument("--t", type=float, default=0.0, help="spin amount (0: flat structure)")
    p.add_argument("--mode", choices=("free", "pinned"), default="free")
    p.add_argument("--shear", type=float, default=None, help="boundary shear for pinned mode (default t)")
    p.add_argument("--grid", type=int, nargs=2, default=(64, 64), metavar=("NX", "NY"))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--mu-cap", type=float, default=modulus.MU_CAP)
    p.add_argument("--convergence", type=int, default=0, metavar="LEVELS", help="run a refinement study")
    p.add_argument("--audit", action="store_true", help="compare both modes with the bound bracket")
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("density", help="bracket for the Teichmueller density")
    p.add_argument("--r", type=float, default=math.e)
    p.add_argument("--p", type=_complex, default=1.0, help="point in the plane, e.g. 1 or 1.3j")
    p.add_argument("--N", type=int, default=10, help="Laurent basis size")
    p.add_argument("--grid", type=int, nargs=2, default=(256, 64), metavar=("NXI", "NETA"))
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("contradiction", help="length-estimate ledger and crossing indices")
    p.add_argument("--r", type=float, default=math.e)
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(func=cmd_contradiction)

    p = sub.add_parser("verify-all", help="run every invariant suite")
    tier = p.add_mutually_exclusive_group()
    tier.add_argument("--quick", action="store_true", help="reduced sizes (default)")
    tier.add_argument("--full", action="store_true", help="acceptance-size grids")
    p.set_defaults(func=cmd_verify_all)
    for name, p in sub.choices.items():
        _add_output(p, "csv" if name in ("ratio-curve", "spin-bounds", "cs-check", "verify-all") else "json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError, OverflowError, SlowConvergenceError) as exc:
        print(f"ckannulus {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailure as exc:
        print(f"ckannulus {args.command}: {exc} {exc.numbers}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
