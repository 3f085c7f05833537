"""Command-line entry point: ``orderfour {solve,bench,analyze,validate-weight}``.

Exit codes: 0 success, 1 usage error, 2 no convergence (or too few iterates
to analyze), 3 method failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction

import mpmath

from . import analysis, bench
from .expr import ExprError, parse_text
from .methods import (
    IterationSettings,
    MethodKind,
    StopReason,
    parse_weight_spec,
    run,
    validate_weight,
)
from .numeric import DEFAULT_DIGITS, Precision, format_sci
from .problems import PROBLEMS, get_problem

PRECISION_ENV = "ORDERFOUR_PRECISION"
CSV_COLUMNS = ("problem_id", "method", "iteration", "x_n", "abs_error", "residual", "stop_reason")
REAL_DIGITS = 30

EXIT_OK, EXIT_USAGE, EXIT_NO_CONVERGENCE, EXIT_METHOD_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--precision", type=int, default=default, help="working decimal digits (default 300)")
    parser.add_argument("--format", choices=("md", "csv"), default=argparse.SUPPRESS if suppress else "md")
    parser.add_argument("--tol", default=default, help="step and residual tolerance")
    parser.add_argument("--max-iter", type=int, default=default, dest="max_iter")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orderfour", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="iterate one method on one equation")
    _global_flags(solve, suppress=True)
    _problem_flags(solve)
    solve.add_argument("--x0", help="starting point (defaults to the problem's)")
    solve.add_argument("--bracket", help="lo,hi around the root; enables the abs_error column")

    table = sub.add_parser("bench", help="reproduce the published error tables")
    _global_flags(table, suppress=True)
    table.add_argument("--table", choices=("1", "2", "3", "all"), default="all")
    table.add_argument("--constants", action="store_true", help="also report predicted vs observed error constants")

    an = sub.add_parser("analyze", help="convergence order, efficiency and error constants")
    _global_flags(an, suppress=True)
    _problem_flags(an)
    an.add_argument("--x0")
    an.add_argument("--bracket", help="lo,hi around the root (required with --expr)")

    vw = sub.add_parser("validate-weight", help="check a weight against the order-four conditions")
    _global_flags(vw, suppress=True)
    vw.add_argument("weight", help="chun | poly:c0,c1,... (optionally prefixed weight=)")
    return parser


def _problem_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--problem", choices=sorted(PROBLEMS))
    group.add_argument("--expr", help="function of x, e.g. 'exp(-x)-1+x/5'")
    parser.add_argument("--method", default="weighted4")
    parser.add_argument("--weight", help="weighted4 only: chun (default) or poly:c0,c1,...")
    parser.add_argument("--a", help="weighted4 only: first-step factor as a rational (default 2/3)")


# --------------------------------------------------------------- helpers


def _precision(args) -> Precision:
    digits = args.precision
    if digits is None:
        env = os.environ.get(PRECISION_ENV)
        try:
            digits = int(env) if env else DEFAULT_DIGITS
        except ValueError:
            raise UsageError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None
    try:
        return Precision(digits)
    except ValueError as exc:
        raise UsageError(f"--precision: {exc}") from None


def _real(precision: Precision, text: str, flag: str):
    try:
        return precision.real(text.strip())
    except (ValueError, TypeError):
        raise UsageError(f"{flag}: not a real number: {text!r}") from None


def _settings(args, precision: Precision) -> IterationSettings:
    tol = _real(precision, args.tol, "--tol") if args.tol is not None else None
    try:
        return IterationSettings(tol, tol, args.max_iter if args.max_iter is not None else 100)
    except ValueError as exc:
        raise UsageError(f"--tol/--max-iter: {exc}") from None


def _method(args) -> MethodKind:
    try:
        weight = parse_weight_spec(args.weight) if args.weight else None
    except ValueError as exc:
        raise UsageError(f"--weight: {exc}") from None
    a = None
    if args.a is not None:
        try:
            a = Fraction(args.a.removeprefix("a=").strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--a: not a rational number: {args.a!r}") from None
    try:
        return MethodKind.from_name(args.method, weight, a)
    except ValueError as exc:
        raise UsageError(f"--method: {exc}") from None


def _target(args, precision: Precision):
    """Resolve (problem_id, expr, x0, bracket-or-None) from the flags."""
    if args.problem:
        problem = get_problem(args.problem)
        x0 = _real(precision, args.x0, "--x0") if args.x0 else problem.start(precision)
        bracket = _bracket(args.bracket, precision) if args.bracket else problem.bracket_at(precision)
        return problem.id, problem.expr, x0, bracket
    try:
        expr = parse_text(args.expr)
    except ExprError as exc:
        raise UsageError(f"--expr: {exc}") from None
    if not args.x0:
        raise UsageError("--x0 is required with --expr")
    bracket = _bracket(args.bracket, precision) if args.bracket else None
    return "adhoc", expr, _real(precision, args.x0, "--x0"), bracket


def _bracket(text: str, precision: Precision):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--bracket: expected lo,hi, got {text!r}")
    return tuple(_real(precision, p, "--bracket") for p in parts)


def _sci(value) -> str:
    return "" if value is None else format_sci(value, REAL_DIGITS)


def _markdown(header, rows) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    line = lambda cells: "| " + " | ".join(str(c).ljust(w) for c, w in zip(cells, widths)) + " |"
    out = [line(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out.extend(line(r) for r in rows)
    return "\n".join(out)


def _csv(header, rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


# --------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    precision = _precision(args)
    method = _method(args)
    problem_id, expr, x0, bracket = _target(args, precision)
    settings = _settings(args, precision)
    try:
        trace = run(expr, method, x0, settings)
    except ExprError as exc:
        raise UsageError(f"--x0: {exc}") from None
    alpha = None
    if bracket is not None:
        try:
            alpha = analysis.reference_root(expr, bracket, precision).alpha
        except analysis.AnalysisError as exc:
            print(f"warning: no reference root ({exc}); abs_error left blank", file=sys.stderr)

    rows = []
    for n, (x, r) in enumerate(zip(trace.iterates, trace.residuals)):
        err = abs(alpha.context.convert(x) - alpha) if alpha is not None else None
        rows.append([problem_id, method.label, n, _sci(x), _sci(err), _sci(r), trace.stop.value])
    if args.format == "csv":
        _csv(CSV_COLUMNS, rows, sys.stdout)
    else:
        print(_markdown(CSV_COLUMNS[2:6], [r[2:6] for r in rows]))
        print()
        print(f"method: {method.label}  precision: {precision.decimal_digits} digits")
        print(f"stop: {trace.stop.value}  iterations: {len(trace.iterates) - 1}  evaluations: {trace.evals_used}")
        if trace.message:
            print(f"detail: {trace.message}")
    if trace.stop.converged:
        return EXIT_OK
    if trace.stop is StopReason.MAX_ITERATIONS:
        return EXIT_NO_CONVERGENCE
    return EXIT_METHOD_FAILURE


def cmd_bench(args) -> int:
    precision = _precision(args)
    tables = (1, 2, 3) if args.table == "all" else (int(args.table),)
    results = [bench.bench_table(t, precision) for t in tables]
    total = sum(len(r.cells) for r in results)
    matched = sum(r.matched for r in results)

    if args.format == "csv":
        header = CSV_COLUMNS + ("paper_value", "computed_value", "match")
        rows = []
        for r in results:
            for c in r.cells:
                rows.append(
                    [r.problem_id, c.method, c.iteration, _sci(c.x), _sci(c.error), _sci(c.residual),
                     r.stops[c.method], c.golden, c.computed, "yes" if c.match else "no"]
                )
        _csv(header, rows, sys.stdout)
    else:
        for r in results:
            print(f"## Table {r.table_id} ({r.problem_id}, {r.decimal_digits} digits)")
            print()
            print("Cells are |x_k - alpha|; '!=' marks a disagreement with the published value.")
            print()
            by_method: dict = {}
            for c in r.cells:
                by_method.setdefault(c.method, []).append(c)
            rows = []
            for name, cells in by_method.items():
                row = [name]
                for c in cells:
                    mark = "" if c.match else f" != {c.golden}"
                    row.append(c.computed + mark)
                rows.append(row)
            print(_markdown(("method", "k=1", "k=2", "k=3"), rows))
            print()
            for c in r.mismatched:
                note = " after doubled-precision recheck" if c.rechecked else ""
                kind = "; mantissa agrees, exponent differs" if c.mantissa_match else ""
                print(f"MISMATCH {c.method} k={c.iteration}: computed {c.computed}, published {c.golden}{note}{kind}")
            print(f"matched: {r.matched}/{len(r.cells)}  mismatched: {len(r.mismatched)}")
            print()
        print(f"total matched: {matched}/{total}  mismatched: {total - matched}")

    if args.constants:
        _print_constants(bench.constants_report(precision), args.format)
    return EXIT_OK if matched == total else EXIT_NO_CONVERGENCE


def _print_constants(findings, fmt: str) -> None:
    header = ("problem_id", "method", "digits", "predicted", "empirical", "relative_gap", "within_10pct")
    rows = [
        [f.problem_id, f.method, f.decimal_digits, _sci(f.predicted), _sci(f.empirical),
         mpmath.nstr(f.relative_gap, 3), "yes" if f.agrees else "no"]
        for f in findings
    ]
    out = sys.stderr if fmt == "csv" else sys.stdout
    if fmt == "csv":
        _csv(header, rows, out)
    else:
        print("## Leading error constants")
        print()
        print(_markdown(header, rows))


def cmd_analyze(args) -> int:
    precision = _precision(args)
    method = _method(args)
    problem_id, expr, x0, bracket = _target(args, precision)
    if bracket is None:
        raise UsageError("--bracket is required with --expr")
    try:
        report = analysis.analyze(expr, method, x0, bracket, precision, _settings(args, precision))
    except analysis.InsufficientIterates as exc:
        print(f"cannot estimate the order: {exc}; the method converged too fast or not at all "
              f"(try a higher --precision)", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except analysis.AnalysisError as exc:
        raise UsageError(f"--bracket: {exc}") from None

    fmt = lambda v, d=10: "n/a" if v is None else mpmath.nstr(v, d)
    verdict = {True: "agrees within 10%", False: "DISAGREES by more than 10%", None: "no prediction"}[report.agrees]
    fields = [
        ("problem", problem_id),
        ("method", report.method),
        ("precision", f"{report.decimal_digits} digits"
         + (f" (escalated {report.escalations}x)" if report.escalations else "")),
        ("root", fmt(report.alpha, 30)),
        ("stop", report.stop),
        ("coc sequence", ", ".join(mpmath.nstr(c, 6) for c in report.coc_sequence)),
        ("final coc", fmt(report.final_coc, 6)),
        ("theoretical order", report.theoretical_order if report.theoretical_order else "unknown"),
        ("efficiency index", fmt(report.efficiency_index, 5)),
        ("empirical constant", fmt(report.empirical_constant)),
        ("predicted constant", fmt(report.predicted_constant)),
        ("verdict", verdict),
    ]
    if args.format == "csv":
        _csv(("field", "value"), fields, sys.stdout)
    else:
        print(_markdown(("field", "value"), fields))
    return EXIT_OK


def cmd_validate_weight(args) -> int:
    try:
        weight = parse_weight_spec(args.weight)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = validate_weight(weight)
    targets = ("1", "-1/4", "2", "finite")
    labels = ("G(1)", "G'(1)", "G''(1)", "G'''(1)")
    rows = [
        [label, str(value), target, "pass" if ok else "FAIL"]
        for label, value, target, ok in zip(labels, report.values, targets, report.checks.values())
    ]
    header = ("condition", "value", "required", "result")
    if args.format == "csv":
        _csv(header, rows, sys.stdout)
    else:
        print(f"weight: {weight.name}")
        print(_markdown(header, rows))
        print("verdict:", "all conditions hold" if report.passed else "rejected")
    return EXIT_OK if report.passed else EXIT_NO_CONVERGENCE


COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "analyze": cmd_analyze,
    "validate-weight": cmd_validate_weight,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"orderfour {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
