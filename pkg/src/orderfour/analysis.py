"""Convergence diagnostics: reference roots, COC, error constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath

from .expr import Expr, eval_jet, eval_real
from .methods import (
    DerivativeVanished,
    IterationSettings,
    MethodKind,
    Trace,
    Variant,
    run,
    validate_weight,
)
from .numeric import Precision, precision_of

USABLE_OFFSET = 30  # errors below 10**(30 - digits) are rounding noise
AGREEMENT = 0.10
MAX_ESCALATIONS = 2


class AnalysisError(ArithmeticError):
    pass


class NoSignChange(AnalysisError):
    pass


class NonConvergence(AnalysisError):
    pass


class InsufficientIterates(AnalysisError):
    pass


@dataclass(frozen=True)
class RootReference:
    alpha: mpmath.mpf
    residual: mpmath.mpf
    bracket: tuple


def reference_root(expr: Expr, bracket, precision: Precision | None = None) -> RootReference:
    """Locate the root inside ``bracket`` at twice the working precision.

    Bisection narrows the bracket to half-width 1e-10, then Newton polishes
    until ``|f| <= 10**(20 - 2*digits)``.
    """
    lo, hi = bracket
    precision = precision or precision_of(lo)
    work = precision.doubled()
    lo, hi = work.real(lo), work.real(hi)
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = eval_real(expr, lo), eval_real(expr, hi)
    if not flo:
        return RootReference(lo, abs(flo), (lo, hi))
    if not fhi:
        return RootReference(hi, abs(fhi), (lo, hi))
    if (flo > 0) == (fhi > 0):
        raise NoSignChange(f"f has the same sign at {mpmath.nstr(lo, 10)} and {mpmath.nstr(hi, 10)}")

    a, b, fa = lo, hi, flo
    width = work.real("1e-10")
    while (b - a) / 2 > width:
        m = (a + b) / 2
        fm = eval_real(expr, m)
        if not fm:
            return RootReference(m, abs(fm), (lo, hi))
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m

    threshold = work.floor(20)
    x = (a + b) / 2
    for _ in range(200):
        jet = eval_jet(expr, x)
        if abs(jet[0]) <= threshold:
            return RootReference(x, abs(jet[0]), (lo, hi))
        if not jet[1]:
            raise NonConvergence("derivative vanished while polishing the root")
        x_next = x - jet[0] / jet[1]
        if x_next == x:
            raise NonConvergence(f"Newton stalled with residual {mpmath.nstr(abs(jet[0]), 5)}")
        x = x_next
    raise NonConvergence("Newton polish did not reach the residual threshold")


def errors(trace: Trace, alpha: mpmath.mpf) -> list:
    """``|x_k - alpha|`` for every iterate, in the precision of ``alpha``."""
    ctx = alpha.context
    return [abs(ctx.convert(x) - alpha) for x in trace.iterates]


def usable_errors(trace: Trace, alpha: mpmath.mpf) -> list:
    """Leading run of errors above the rounding floor of the trace."""
    floor = alpha.context.convert(trace.precision.floor(USABLE_OFFSET))
    out = []
    for e in errors(trace, alpha):
        if e <= floor:
            break
        out.append(e)
    return out


def coc_estimate(trace: Trace, alpha: mpmath.mpf) -> list:
    """Computational order of convergence for each usable error triple."""
    errs = usable_errors(trace, alpha)
    if len(errs) < 3:
        raise InsufficientIterates(f"need 3 usable errors, have {len(errs)}")
    ln = alpha.context.ln
    return [ln(errs[n + 1] / errs[n]) / ln(errs[n] / errs[n - 1]) for n in range(1, len(errs) - 1)]


def efficiency_index(order, evals: int, precision: Precision | None = None) -> mpmath.mpf:
    if evals < 1:
        raise ValueError("evals must be a positive integer")
    if not order > 1:
        raise ValueError("order must exceed 1")
    precision = precision or Precision()
    return precision.real(order) ** (precision.ctx.one / evals)


class TaylorCoefficients(NamedTuple):
    fprime: mpmath.mpf
    c2: mpmath.mpf
    c3: mpmath.mpf
    c4: mpmath.mpf


def taylor_coeffs(expr: Expr, alpha: mpmath.mpf) -> TaylorCoefficients:
    """``f'(alpha)`` and ``c_h = f^(h)(alpha) / (h! f'(alpha))`` for h = 2..4."""
    jet = eval_jet(expr, alpha)
    d = jet[1]
    if not d:
        raise DerivativeVanished("f'(alpha) = 0; the root is not simple")
    return TaylorCoefficients(d, jet[2] / d, jet[3] / d, jet[4] / d)


def predicted_constant_newton(coeffs: TaylorCoefficients) -> mpmath.mpf:
    return coeffs.c2


def predicted_constant_third_inverse_bisectrix(coeffs: TaylorCoefficients) -> mpmath.mpf:
    return coeffs.c2**2 / (1 + coeffs.fprime**2) + coeffs.c3 / 2


def predicted_constant_fourth(coeffs: TaylorCoefficients, g3) -> mpmath.mpf:
    c2, c3, c4 = coeffs.c2, coeffs.c3, coeffs.c4
    return -c2 * c3 + c4 / 9 + (309 + 32 * g3) * c2**3 / 81


def predicted_constant(method: MethodKind, coeffs: TaylorCoefficients):
    """Leading error coefficient where theory provides one, else None."""
    v = method.variant
    if v is Variant.NEWTON:
        return predicted_constant_newton(coeffs)
    if v in (Variant.INVERSE_BISECTRIX, Variant.BISECTRIX):
        # The two correction formulas are algebraically identical.
        return predicted_constant_third_inverse_bisectrix(coeffs)
    if v is Variant.WEIGHTED4 and method.theoretical_order == 4:
        g3 = validate_weight(method.weight).g3
        return predicted_constant_fourth(coeffs, coeffs.c2.context.convert(g3))
    return None


@dataclass
class ConvergenceReport:
    method: str
    decimal_digits: int
    theoretical_order: int | None
    evals_per_iter: int
    coc_sequence: list
    final_coc: mpmath.mpf
    empirical_ratios: list
    empirical_constant: mpmath.mpf
    efficiency_index: mpmath.mpf | None
    predicted_constant: mpmath.mpf | None = None
    alpha: mpmath.mpf | None = None
    stop: str = ""
    escalations: int = 0
    notes: list = field(default_factory=list)

    @property
    def relative_gap(self):
        if self.predicted_constant is None:
            return None
        target = abs(self.predicted_constant)
        if not target:
            return None
        return abs(self.empirical_constant - target) / target

    @property
    def agrees(self) -> bool | None:
        gap = self.relative_gap
        return None if gap is None else gap <= AGREEMENT


def error_ratios(errs: list, order: int) -> list:
    return [errs[n + 1] / errs[n] ** order for n in range(len(errs) - 1)]


def analyze(
    expr: Expr,
    method: MethodKind,
    x0,
    bracket,
    precision: Precision | None = None,
    settings: IterationSettings | None = None,
    escalate: bool = True,
) -> ConvergenceReport:
    """Run ``method`` and summarize its observed convergence.

    With ``escalate``, a run giving fewer than two error ratios (or too few
    usable iterates to estimate the order at all), or a
    predicted constant off by more than 10%, is repeated at doubled precision
    (at most twice) before being reported.
    """
    precision = precision or precision_of(x0)
    escalations = 0
    while True:
        can_retry = escalate and escalations < MAX_ESCALATIONS
        try:
            report = _analyze_once(expr, method, precision.real(x0), bracket, precision, settings)
        except InsufficientIterates:
            if not can_retry:
                raise
        else:
            report.escalations = escalations
            needs_more = len(report.empirical_ratios) < 2 or report.agrees is False
            if not (can_retry and needs_more):
                return report
        precision = precision.doubled()
        escalations += 1


def _analyze_once(expr, method, x0, bracket, precision, settings) -> ConvergenceReport:
    ref = reference_root(expr, bracket, precision)
    trace = run(expr, method, x0, settings)
    coc = coc_estimate(trace, ref.alpha)
    errs = usable_errors(trace, ref.alpha)
    order = method.theoretical_order
    p = order if order is not None else int(mpmath.nint(coc[-1]))
    ratios = error_ratios(errs, p)
    coeffs = taylor_coeffs(expr, ref.alpha)
    predicted = predicted_constant(method, coeffs)
    return ConvergenceReport(
        method=method.label,
        decimal_digits=precision.decimal_digits,
        theoretical_order=order,
        evals_per_iter=method.evals_per_iter,
        coc_sequence=coc,
        final_coc=coc[-1],
        empirical_ratios=ratios,
        empirical_constant=ratios[-1],
        efficiency_index=efficiency_index(order, method.evals_per_iter, precision) if order else None,
        predicted_constant=predicted,
        alpha=ref.alpha,
        stop=trace.stop.value,
    )
