"""Command-line interface: ``table``, ``moment``, ``verify`` and ``mc``.

Exit codes:
    0: success / every check passed
    1: a verification failed, or a Monte Carlo z-score exceeded the limit
    2: usage or expression error

Environment:
    MF_THREADS  default for --threads (0 = one per CPU)
    MF_SEED     default Monte Carlo seed
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from collections import Counter, OrderedDict

from . import __version__
from .exact import Fraction, Poly, poly_eval
from .identities import IDENTITY_IDS, overall_verdict, run_suite
from .moments import ExpressionError, moment, parse_expression
from .montecarlo import DEFAULT_PANEL, MIN_SAMPLES, Z_LIMIT, default_seed, mc_moment, panel_ok
from .report import ReportDocument, exact_value, identity_report_dict, mc_result_dict
from .special import (
    bernoulli_higher,
    bernoulli_second_kind,
    derangement,
    derangement_poly,
    stirling1,
    stirling1_deg,
    stirling2,
    stirling2_deg,
)

TRIANGLES = {"s1": stirling1, "s2": stirling2, "s1deg": stirling1_deg, "s2deg": stirling2_deg}
SEQUENCES = ("bern2", "derange", "bern-higher:<r>")


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _default_threads() -> int:
    return int(os.environ.get("MF_THREADS", "1"))


def _cell_text(value) -> str:
    if isinstance(value, Poly):
        return value.to_text("l")
    return str(value)


def _csv_cell(value):
    # integers stay bare; everything else is quoted text (e.g. "1/2", "1 - l")
    if isinstance(value, int) or (isinstance(value, Fraction) and value.denominator == 1):
        return int(value)
    return _cell_text(value)


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(c) for c in row])
    return buf.getvalue()


# --- table --------------------------------------------------------------------

def _sequence_family(family: str, x):
    if family == "bern2":
        return lambda n: bernoulli_second_kind(n)
    if family == "derange":
        if x is None:
            return lambda n: derangement(n)
        return lambda n: derangement_poly(n, x)
    if family.startswith("bern-higher:"):
        try:
            r = int(family.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad order in {family!r}; expected bern-higher:<integer>") from None
        return lambda n: bernoulli_higher(n, r, x or 0)
    return None


def cmd_table(args) -> tuple[ReportDocument, str, int]:
    family = args.family
    if family in TRIANGLES:
        if args.x is not None:
            raise UsageError("--x applies to bern-higher:<r> and derange only")
        if args.lam is not None and family not in ("s1deg", "s2deg"):
            raise UsageError("--lambda applies to s1deg and s2deg only")
        fn = TRIANGLES[family]
        k_max = args.n_max if args.k_max is None else args.k_max
        entries = []
        for n in range(args.n_max + 1):
            for k in range(min(n, k_max) + 1):
                value = fn(n, k)
                if args.lam is not None:
                    value = poly_eval(value, args.lam)
                entries.append((n, k, value))
        results = [{"n": n, "k": k, "value": exact_value(v)} for n, k, v in entries]
        if args.format == "csv":
            text = _write_csv(["n", "k", "value"], entries)
        else:
            rows: "OrderedDict[int, list]" = OrderedDict()
            for n, _, v in entries:
                rows.setdefault(n, []).append(_cell_text(v))
            text = "".join(f"{n}\t" + "\t".join(vals) + "\n" for n, vals in rows.items())
    else:
        fn = _sequence_family(family, args.x)
        if fn is None:
            raise UsageError(f"unknown family {family!r}; expected one of {', '.join([*TRIANGLES, *SEQUENCES])}")
        if args.lam is not None:
            raise UsageError("--lambda applies to s1deg and s2deg only")
        if args.k_max is not None:
            raise UsageError("--k-max applies to triangular families only")
        entries = [(n, fn(n)) for n in range(args.n_max + 1)]
        results = [{"n": n, "value": exact_value(v)} for n, v in entries]
        if args.format == "csv":
            text = _write_csv(["n", "value"], entries)
        else:
            text = "".join(f"{n}\t{v}\n" for n, v in entries)
    return ReportDocument(command=args.argv, results=results), text, 0


# --- moment -------------------------------------------------------------------

def cmd_moment(args) -> tuple[ReportDocument, str, int]:
    expr = parse_expression(args.expr)
    value = moment(expr, args.n)
    doc = ReportDocument(command=args.argv, results=[{"expr": str(expr), "n": args.n, "value": exact_value(value)}])
    if args.format == "csv":
        return doc, _write_csv(["expr", "n", "value"], [(str(expr), args.n, value)]), 0
    return doc, f"{value}\n", 0


# --- verify -------------------------------------------------------------------

def cmd_verify(args) -> tuple[ReportDocument, str, int]:
    identities = None if args.identity == "all" else [args.identity]
    lambdas = [args.lam] if args.lam is not None else None
    if args.lam is not None and args.lambda_mode != "sampled":
        raise UsageError("--lambda needs --lambda-mode sampled")
    start = time.perf_counter()
    reports = run_suite(
        args.n_max, args.k_max, args.lambda_mode, identities=identities, lambdas=lambdas, threads=args.threads
    )
    elapsed = time.perf_counter() - start
    overall = overall_verdict(reports)
    doc = ReportDocument(command=args.argv, results=[identity_report_dict(r) for r in reports], overall=overall)

    if args.format == "csv":
        rows = [
            (r.identity_id, " ".join(f"{k}={v}" for k, v in r.params.items()), _cell_text(r.lhs), _cell_text(r.rhs), r.verdict)
            for r in reports
        ]
        text = _write_csv(["identity", "params", "lhs", "rhs", "verdict"], rows)
    else:
        totals = Counter(r.identity_id for r in reports)
        passed = Counter(r.identity_id for r in reports if r.passed)
        lines = [f"{ident:<12} {'PASS' if passed[ident] == totals[ident] else 'FAIL'}  {passed[ident]}/{totals[ident]}"
                 for ident in totals]  # fmt: skip
        for r in reports:
            if not r.passed:
                params = ", ".join(f"{k}={v}" for k, v in r.params.items())
                lines.append(f"FAIL {r.identity_id}({params}): lhs={_cell_text(r.lhs)} rhs={_cell_text(r.rhs)} {r.note}".rstrip())
        lines.append(f"overall: {overall} ({len(reports)} checks, {elapsed:.2f}s)")
        text = "\n".join(lines) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(doc.to_json())
    return doc, text, 0 if overall == "PASS" else 1


# --- mc -----------------------------------------------------------------------

def cmd_mc(args) -> tuple[ReportDocument, str, int]:
    if args.samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be at least {MIN_SAMPLES}")
    seed = default_seed() if args.seed is None else args.seed
    if args.panel:
        if args.expr is not None:
            raise UsageError("--panel and --expr are mutually exclusive")
        pairs = list(DEFAULT_PANEL)
    else:
        if args.expr is None or args.n is None:
            raise UsageError("mc needs --expr and --n (or --panel)")
        pairs = [(args.expr, args.n)]
    try:
        results = [mc_moment(text, n, args.samples, seed, args.threads) for text, n in pairs]
    except ValueError as exc:
        if isinstance(exc, ExpressionError):
            raise
        raise UsageError(str(exc)) from None
    ok = panel_ok(results) if args.panel else results[0].within_tolerance
    doc = ReportDocument(command=args.argv, results=[mc_result_dict(r) for r in results], overall="PASS" if ok else "FAIL")
    if args.format == "csv":
        rows = [(r.expr, r.n, repr(r.estimate), r.exact, repr(r.std_error), repr(r.z_score), r.samples, r.seed) for r in results]
        text = _write_csv(["expr", "n", "estimate", "exact", "std_error", "z_score", "samples", "seed"], rows)
    else:
        lines = [
            f"{r.expr} ^ {r.n}: estimate={r.estimate:.6g} exact={r.exact} (~{float(r.exact):.6g}) "
            f"se={r.std_error:.3g} z={r.z_score:+.2f}{'' if r.within_tolerance else '  OUTLIER'}"
            for r in results
        ]
        lines.append(f"samples={args.samples} seed={seed} |z| limit={Z_LIMIT:g}: {doc.overall}")
        text = "\n".join(lines) + "\n"
    return doc, text, 0 if ok else 1


# --- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfcheck", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("plain", "json", "csv"), default="plain")

    p = sub.add_parser("table", help="print a special-number table")
    p.add_argument("--family", required=True, help="s1, s2, s1deg, s2deg, bern2, derange or bern-higher:<r>")
    p.add_argument("--n-max", type=_nonneg, required=True)
    p.add_argument("--k-max", type=_nonneg)
    p.add_argument("--lambda", dest="lam", type=_rational, help="evaluate degenerate families at this rational")
    p.add_argument("--x", type=_rational, help="argument for bern-higher:<r> or derangement polynomials")
    add_format(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("moment", help="exact moment E[expr^n]")
    p.add_argument("--expr", required=True)
    p.add_argument("--n", type=_nonneg, required=True)
    add_format(p)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("verify", help="check identities exactly")
    p.add_argument("--identity", default="all", choices=("all", *IDENTITY_IDS))
    p.add_argument("--n-max", type=_nonneg, default=12)
    p.add_argument("--k-max", type=_nonneg, default=5)
    p.add_argument("--lambda-mode", choices=("symbolic", "sampled"), default="symbolic")
    p.add_argument("--lambda", dest="lam", type=_rational, help="single lambda for sampled mode")
    p.add_argument("--report", help="write the JSON report to this path")
    p.add_argument("--threads", type=int, default=_default_threads())
    add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo cross-check of an exact moment")
    p.add_argument("--expr")
    p.add_argument("--n", type=_nonneg)
    p.add_argument("--panel", action="store_true", help="run the default calibration panel")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=_default_threads())
    add_format(p)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        doc, text, code = args.func(args)
    except (UsageError, ExpressionError) as exc:
        print(f"mfcheck {args.command}: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(doc.to_json() if args.format == "json" else text)
    return code


if __name__ == "__main__":
    sys.exit(main())
