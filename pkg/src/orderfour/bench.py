"""Reproduce the published error tables and diff them cell by cell."""

from __future__ import annotations

import decimal
from dataclasses import dataclass, field

import mpmath

from .analysis import (
    USABLE_OFFSET,
    analyze,
    reference_root,
)
from .methods import ALL_METHODS, IterationSettings, MethodKind, run
from .numeric import Precision, format_sci
from .problems import GOLDEN, TABLE_PROBLEM, get_problem

ITERATIONS = 3
_ROUND5 = decimal.Context(prec=5, rounding=decimal.ROUND_HALF_EVEN)


def paper_format(value: mpmath.mpf) -> str:
    """Round to 5 significant digits (half-even) and print as ``0.ddddde<exp>``.

    ``4.2864e-10`` becomes ``0.42864e-9``.
    """
    if not value:
        return "0.00000e0"
    d = _ROUND5.plus(decimal.Decimal(format_sci(abs(value), 40)))
    sign, digits, exponent = d.as_tuple()
    text = "".join(map(str, digits)).ljust(5, "0")
    return f"0.{text}e{exponent + len(digits)}"


def parse_paper_value(text: str) -> tuple[str, int]:
    mantissa, _, exponent = text.lower().partition("e")
    whole, _, frac = mantissa.partition(".")
    if whole not in ("", "0") or not frac.isdigit():
        raise ValueError(f"not a 0.ddddd e<exp> value: {text!r}")
    return frac, int(exponent)


@dataclass
class Cell:
    method: str
    iteration: int
    x: mpmath.mpf | None
    error: mpmath.mpf | None
    residual: mpmath.mpf | None
    computed: str
    golden: str
    rechecked: bool = False

    @property
    def match(self) -> bool:
        try:
            return parse_paper_value(self.computed) == parse_paper_value(self.golden)
        except ValueError:
            return False

    @property
    def mantissa_match(self) -> bool:
        """Same five digits, different exponent: points at a misprinted exponent."""
        try:
            return parse_paper_value(self.computed)[0] == parse_paper_value(self.golden)[0]
        except ValueError:
            return False


@dataclass
class TableResult:
    table_id: int
    problem_id: str
    decimal_digits: int
    cells: list = field(default_factory=list)
    stops: dict = field(default_factory=dict)

    @property
    def matched(self) -> int:
        return sum(c.match for c in self.cells)

    @property
    def mismatched(self) -> list:
        return [c for c in self.cells if not c.match]


def _cells(table_id: int, precision: Precision) -> tuple[list, dict, bool]:
    """Compute every cell of one table; also reports whether any third-iterate
    error fell below the usability floor."""
    problem = get_problem(TABLE_PROBLEM[table_id])
    expr = problem.expr
    alpha = reference_root(expr, problem.bracket_at(precision), precision).alpha
    floor = alpha.context.convert(precision.floor(USABLE_OFFSET))
    # Tolerances far below rounding so three steps are always taken.
    tiny = precision.floor(-10)
    settings = IterationSettings(tiny, tiny, ITERATIONS)
    cells, stops, underflow = [], {}, False
    for method in ALL_METHODS:
        golden = GOLDEN[table_id][method.name]
        trace = run(expr, method, problem.start(precision), settings)
        stops[method.name] = trace.stop.value
        for k in range(1, ITERATIONS + 1):
            if k < len(trace.iterates):
                x = trace.iterates[k]
                err = abs(alpha.context.convert(x) - alpha)
                cells.append(Cell(method.name, k, x, err, trace.residuals[k], paper_format(err), golden[k - 1]))
                if k == ITERATIONS and err <= floor:
                    underflow = True
            else:
                cells.append(Cell(method.name, k, None, None, None, "missing", golden[k - 1]))
    return cells, stops, underflow


def bench_table(table_id: int, precision: Precision | None = None) -> TableResult:
    """Compute one table.

    Precision doubles once if a third-iterate error underflows the usability
    floor.  Mismatched cells are recomputed at doubled precision; a cell that
    still disagrees is left as a mismatch so the published value can be
    inspected.
    """
    if table_id not in TABLE_PROBLEM:
        raise ValueError(f"table must be one of {sorted(TABLE_PROBLEM)}")
    precision = precision or Precision()
    cells, stops, underflow = _cells(table_id, precision)
    if underflow:
        precision = precision.doubled()
        cells, stops, _ = _cells(table_id, precision)
    result = TableResult(table_id, TABLE_PROBLEM[table_id], precision.decimal_digits, cells, stops)
    if result.mismatched:
        redo = {(c.method, c.iteration): c for c in _cells(table_id, precision.doubled())[0]}
        for i, cell in enumerate(result.cells):
            if not cell.match:
                fresh = redo[(cell.method, cell.iteration)]
                fresh.rechecked = True
                result.cells[i] = fresh
    return result


CONSTANT_METHODS = ("newton", "inverse-bisectrix", "weighted4")


@dataclass(frozen=True)
class ConstantFinding:
    problem_id: str
    method: str
    decimal_digits: int
    predicted: mpmath.mpf
    empirical: mpmath.mpf
    relative_gap: mpmath.mpf
    agrees: bool


def constants_report(precision: Precision | None = None) -> list:
    """Predicted vs observed leading error coefficients on every problem."""
    precision = precision or Precision()
    rows = []
    for table_id in sorted(TABLE_PROBLEM):
        problem = get_problem(TABLE_PROBLEM[table_id])
        for name in CONSTANT_METHODS:
            report = analyze(
                problem.expr,
                MethodKind.from_name(name),
                problem.x0,
                problem.bracket,
                precision,
            )
            rows.append(
                ConstantFinding(
                    problem.id,
                    name,
                    report.decimal_digits,
                    report.predicted_constant,
                    report.empirical_constant,
                    report.relative_gap,
                    bool(report.agrees),
                )
            )
    return rows
