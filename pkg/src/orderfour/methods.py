"""Newton-type iteration schemes and the driver that records their traces.

All steppers share the Newton predictor ``y = x - f(x)/f'(x)`` (scaled by
``a`` for the weighted family) and differ in how they correct it:

========================  =====  =====
method                    order  evals
========================  =====  =====
newton                      2      2
weerakoon                   3      3
homeier                     3      3
bisectrix                   3      3
inverse-bisectrix           3      3
chun3                       3      3
weighted4 (a = 2/3)         4      3
========================  =====  =====

Three evaluations reaching order four makes ``weighted4`` optimal in the
Kung-Traub sense.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .expr import EvalDomainError, Expr, eval_jet, eval_real, parse_text
from .numeric import Precision, precision_of


class MethodError(ArithmeticError):
    pass


class DerivativeVanished(MethodError):
    pass


class DenominatorVanished(MethodError):
    pass


class InvalidWeight(ValueError):
    pass


class Variant(str, enum.Enum):
    NEWTON = "newton"
    WEERAKOON = "weerakoon"
    HOMEIER = "homeier"
    BISECTRIX = "bisectrix"
    INVERSE_BISECTRIX = "inverse-bisectrix"
    CHUN3 = "chun3"
    WEIGHTED4 = "weighted4"


_ORDER = {Variant.NEWTON: 2, Variant.WEIGHTED4: 4}
_EVALS = {Variant.NEWTON: 2}
OPTIMAL_A = Fraction(2, 3)


# ----------------------------------------------------------------- weights


@dataclass(frozen=True)
class WeightFn:
    """Weight ``G(t)`` for the fourth-order family.

    Either a polynomial in ``t`` with exact rational coefficients (low to high
    degree) or an expression in ``x`` standing for ``t``.
    """

    name: str
    coefficients: tuple[Fraction, ...] | None = None
    expr: Expr | None = field(default=None, compare=False)

    @classmethod
    def polynomial(cls, coefficients, name: str | None = None) -> "WeightFn":
        coeffs = tuple(Fraction(c) for c in coefficients)
        if not coeffs:
            raise ValueError("polynomial weight needs at least one coefficient")
        label = name or "poly:" + ",".join(str(c) for c in coeffs)
        return cls(label, coeffs)

    @classmethod
    def chun(cls) -> "WeightFn":
        """``G(t) = 9/4 - 9/4 t + t^2``, the default weight."""
        return cls.polynomial([Fraction(9, 4), Fraction(-9, 4), 1], name="chun")

    @classmethod
    def from_expr(cls, text: str) -> "WeightFn":
        return cls(f"expr:{text}", None, parse_text(text))

    @property
    def is_polynomial(self) -> bool:
        return self.coefficients is not None

    @functools.cached_property
    def exact_derivatives_at_one(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """``(G(1), G'(1), G''(1), G'''(1))`` in exact arithmetic."""
        if not self.is_polynomial:
            raise TypeError("exact derivatives need a polynomial weight")
        out = []
        coeffs = list(self.coefficients)
        for _ in range(4):
            out.append(sum(coeffs, Fraction(0)))
            coeffs = [k * c for k, c in enumerate(coeffs)][1:]
        return tuple(out)

    def derivatives_at_one(self, precision: Precision) -> tuple:
        if self.is_polynomial:
            return tuple(precision.real(v) for v in self.exact_derivatives_at_one)
        jet = eval_jet(self.expr, precision.ctx.one)
        return tuple(jet.derivative(k) for k in range(4))

    def __call__(self, t: mpmath.mpf) -> mpmath.mpf:
        if self.is_polynomial:
            ctx = t.context
            acc = ctx.zero
            for c in reversed(self.coefficients):
                acc = acc * t + ctx.mpf(c.numerator) / c.denominator
            return acc
        return eval_real(self.expr, t)


def parse_weight_spec(spec: str) -> WeightFn:
    """Parse ``chun`` or ``poly:<c0,c1,...>`` (a leading ``weight=`` is allowed)."""
    text = spec.strip()
    if text.startswith("weight="):
        text = text[len("weight="):]
    if text == "chun":
        return WeightFn.chun()
    if text.startswith("poly:"):
        try:
            return WeightFn.polynomial(p.strip() for p in text[5:].split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed polynomial weight {spec!r}: {exc}") from None
    raise ValueError(f"unknown weight spec {spec!r}; use 'chun' or 'poly:c0,c1,...'")


@dataclass(frozen=True)
class WeightReport:
    values: tuple  # G(1), G'(1), G''(1), G'''(1)
    checks: dict
    exact: bool

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def g3(self):
        return self.values[3]


WEIGHT_TARGETS = (("G(1)", Fraction(1)), ("G'(1)", Fraction(-1, 4)), ("G''(1)", Fraction(2)))


def validate_weight(weight: WeightFn, tol=Fraction(1, 10**30), precision: Precision | None = None) -> WeightReport:
    """Check the three conditions that lift the weighted family to order four.

    Polynomials are checked in exact rational arithmetic; other weights by a
    jet expansion at ``t = 1``.  ``G'''(1)`` only has to be finite.
    """
    if weight.is_polynomial:
        values = weight.exact_derivatives_at_one
        tol = Fraction(tol) if not isinstance(tol, Fraction) else tol
        checks = {label: abs(values[i] - target) <= tol for i, (label, target) in enumerate(WEIGHT_TARGETS)}
        checks["G'''(1) finite"] = True
        return WeightReport(values, checks, exact=True)
    precision = precision or Precision()
    values = weight.derivatives_at_one(precision)
    ctx = precision.ctx
    tol = precision.real(tol)
    checks = {
        label: abs(values[i] - precision.real(target)) <= tol
        for i, (label, target) in enumerate(WEIGHT_TARGETS)
    }
    checks["G'''(1) finite"] = bool(ctx.isfinite(values[3]))
    return WeightReport(values, checks, exact=False)


@functools.lru_cache(maxsize=64)
def _weight_ok(weight: WeightFn) -> bool:
    return validate_weight(weight).passed


# ----------------------------------------------------------------- kinds


@dataclass(frozen=True)
class MethodKind:
    variant: Variant
    weight: WeightFn | None = None
    a: Fraction | None = None

    def __post_init__(self) -> None:
        if self.variant is Variant.WEIGHTED4:
            if self.weight is None:
                object.__setattr__(self, "weight", WeightFn.chun())
            object.__setattr__(self, "a", OPTIMAL_A if self.a is None else Fraction(self.a))

    @classmethod
    def from_name(cls, name: str, weight: WeightFn | None = None, a=None) -> "MethodKind":
        try:
            variant = Variant(name)
        except ValueError:
            names = ", ".join(v.value for v in Variant)
            raise ValueError(f"unknown method {name!r}; choose from {names}") from None
        if variant is not Variant.WEIGHTED4 and (weight is not None or a is not None):
            raise ValueError("weight and a only apply to weighted4")
        return cls(variant, weight, a)

    @property
    def name(self) -> str:
        return self.variant.value

    @property
    def label(self) -> str:
        if self.variant is Variant.WEIGHTED4 and (self.weight.name != "chun" or self.a != OPTIMAL_A):
            return f"weighted4[{self.weight.name};a={self.a}]"
        return self.name

    @property
    def theoretical_order(self) -> int | None:
        """Proven order, or None for the weighted family off ``a = 2/3``."""
        if self.variant is Variant.WEIGHTED4 and self.a != OPTIMAL_A:
            return None
        return _ORDER.get(self.variant, 3)

    @property
    def evals_per_iter(self) -> int:
        return _EVALS.get(self.variant, 3)


ALL_METHODS = tuple(MethodKind(v) for v in Variant)


# -------------------------------------------------------------- steppers


def _threshold(x: mpmath.mpf) -> mpmath.mpf:
    return precision_of(x).floor(10)


def _f_and_slope(expr: Expr, x: mpmath.mpf):
    jet = eval_jet(expr, x)
    fx, dfx = jet[0], jet[1]
    if abs(dfx) <= _threshold(x):
        raise DerivativeVanished(f"f'(x) vanished at x = {mpmath.nstr(x, 15)}")
    return fx, dfx


def _slope(expr: Expr, x: mpmath.mpf) -> mpmath.mpf:
    return eval_jet(expr, x)[1]


def _check_denominator(value: mpmath.mpf, what: str) -> None:
    if abs(value) <= _threshold(value):
        raise DenominatorVanished(f"{what} vanished")


def _newton(expr, x):
    fx, dfx = _f_and_slope(expr, x)
    y = x - fx / dfx
    return y, y


def _weerakoon(expr, x):
    fx, dfx = _f_and_slope(expr, x)
    y = x - fx / dfx
    den = dfx + _slope(expr, y)
    _check_denominator(den, "f'(x) + f'(y)")
    return x - 2 * fx / den, y


def _homeier(expr, x):
    fx, dfx = _f_and_slope(expr, x)
    y = x - fx / dfx
    dfy = _slope(expr, y)
    _check_denominator(dfy, "f'(y)")
    return x - fx / 2 * (1 / dfx + 1 / dfy), y


def _bisectrix(expr, x):
    fx, dfx = _f_and_slope(expr, x)
    y = x - fx / dfx
    dfy = _slope(expr, y)
    ctx = x.context
    den = dfx * dfy + ctx.sqrt((1 + dfx**2) * (1 + dfy**2)) - 1
    _check_denominator(den, "bisectrix denominator")
    return x - (dfx + dfy) * fx / den, y


def _inverse_bisectrix(expr, x):
    fx, dfx = _f_and_slope(expr, x)
    y = x - fx / dfx
    dfy = _slope(expr, y)
    radicand = (1 + dfx**2) * (1 + dfy**2)
    assert radicand >= 1, "radicand below one"
    den = dfx + dfy
    _check_denominator(den, "f'(x) + f'(y)")
    return x - fx * (1 + x.context.sqrt(radicand) - dfx * dfy) / den, y


def _chun(expr, x):
    fx, dfx = _f_and_slope(expr, x)
    u = fx / dfx
    y = x - u
    t = _slope(expr, y) / dfx
    return x - (3 - t) / 2 * u, y


def _weighted(expr, x, weight: WeightFn, a: Fraction):
    fx, dfx = _f_and_slope(expr, x)
    u = fx / dfx
    y = x - a.numerator * u / a.denominator
    t = _slope(expr, y) / dfx
    return x - (3 - t) / 2 * u * weight(t), y


_CLASSIC: dict[Variant, Callable] = {
    Variant.NEWTON: _newton,
    Variant.WEERAKOON: _weerakoon,
    Variant.HOMEIER: _homeier,
    Variant.BISECTRIX: _bisectrix,
}


def step_classic(kind: MethodKind, expr: Expr, x: mpmath.mpf) -> mpmath.mpf:
    """One step of newton, weerakoon, homeier or bisectrix."""
    try:
        stepper = _CLASSIC[kind.variant]
    except KeyError:
        raise ValueError(f"{kind.name} is not a classic method") from None
    return stepper(expr, x)[0]


def step_inverse_bisectrix(expr: Expr, x: mpmath.mpf) -> mpmath.mpf:
    return _inverse_bisectrix(expr, x)[0]


def step_chun(expr: Expr, x: mpmath.mpf) -> mpmath.mpf:
    return _chun(expr, x)[0]


def step_weighted_fourth(expr: Expr, x: mpmath.mpf, weight: WeightFn, a=OPTIMAL_A) -> mpmath.mpf:
    if not _weight_ok(weight):
        raise InvalidWeight(f"weight {weight.name} fails the order-four conditions")
    return _weighted(expr, x, weight, Fraction(a))[0]


def step(kind: MethodKind, expr: Expr, x: mpmath.mpf) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Advance one iteration; returns ``(x_next, y)``."""
    v = kind.variant
    if v in _CLASSIC:
        return _CLASSIC[v](expr, x)
    if v is Variant.INVERSE_BISECTRIX:
        return _inverse_bisectrix(expr, x)
    if v is Variant.CHUN3:
        return _chun(expr, x)
    return _weighted(expr, x, kind.weight, kind.a)


# ---------------------------------------------------------------- driver


class StopReason(str, enum.Enum):
    STEP_TOLERANCE = "StepTolerance"
    RESIDUAL_TOLERANCE = "ResidualTolerance"
    MAX_ITERATIONS = "MaxIterations"
    DERIVATIVE_VANISHED = "DerivativeVanished"
    DENOMINATOR_VANISHED = "DenominatorVanished"
    DOMAIN_ERROR = "DomainError"

    @property
    def converged(self) -> bool:
        return self in (StopReason.STEP_TOLERANCE, StopReason.RESIDUAL_TOLERANCE)


@dataclass(frozen=True)
class IterationSettings:
    tol_step: mpmath.mpf | None = None
    tol_residual: mpmath.mpf | None = None
    max_iter: int = 100

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        for tol in (self.tol_step, self.tol_residual):
            if tol is not None and not tol > 0:
                raise ValueError("tolerances must be positive")

    def resolved(self, precision: Precision) -> "IterationSettings":
        default = precision.floor(20)
        return IterationSettings(
            precision.real(self.tol_step) if self.tol_step is not None else default,
            precision.real(self.tol_residual) if self.tol_residual is not None else default,
            self.max_iter,
        )


@dataclass
class Trace:
    method: MethodKind
    iterates: list
    residuals: list
    aux_points: list
    stop: StopReason | None = None
    message: str = ""

    @property
    def evals_used(self) -> int:
        return (len(self.iterates) - 1) * self.method.evals_per_iter

    @property
    def root(self) -> mpmath.mpf:
        return self.iterates[-1]

    @property
    def precision(self) -> Precision:
        return precision_of(self.iterates[0])


def run(expr: Expr, method: MethodKind, x0: mpmath.mpf, settings: IterationSettings | None = None) -> Trace:
    """Iterate ``method`` from ``x0`` until a stop rule fires.

    Method failures end the trace with the matching stop reason instead of
    raising.  An ``x0`` outside the domain of ``expr`` still raises.
    """
    precision = precision_of(x0)
    settings = (settings or IterationSettings()).resolved(precision)
    if method.variant is Variant.WEIGHTED4 and not _weight_ok(method.weight):
        raise InvalidWeight(f"weight {method.weight.name} fails the order-four conditions")

    x = x0
    trace = Trace(method, [x0], [eval_real(expr, x0)], [])
    if abs(trace.residuals[0]) <= settings.tol_residual:
        trace.stop = StopReason.RESIDUAL_TOLERANCE
        return trace

    for _ in range(settings.max_iter):
        try:
            x_next, y = step(method, expr, x)
            fx_next = eval_real(expr, x_next)
        except DerivativeVanished as exc:
            trace.stop, trace.message = StopReason.DERIVATIVE_VANISHED, str(exc)
            return trace
        except DenominatorVanished as exc:
            trace.stop, trace.message = StopReason.DENOMINATOR_VANISHED, str(exc)
            return trace
        except EvalDomainError as exc:
            trace.stop, trace.message = StopReason.DOMAIN_ERROR, str(exc)
            return trace
        trace.iterates.append(x_next)
        trace.residuals.append(fx_next)
        trace.aux_points.append(y)
        if abs(x_next - x) <= settings.tol_step:
            trace.stop = StopReason.STEP_TOLERANCE
            return trace
        if abs(fx_next) <= settings.tol_residual:
            trace.stop = StopReason.RESIDUAL_TOLERANCE
            return trace
        x = x_next
    trace.stop = StopReason.MAX_ITERATIONS
    return trace
