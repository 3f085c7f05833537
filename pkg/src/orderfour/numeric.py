"""Extended-precision scalars and degree-4 Taylor jets.

Real numbers are mpmath ``mpf`` values bound to a private ``MPContext`` per
precision, so two solvers running at different precisions never touch the
global ``mpmath.mp`` state.  A :class:`Jet4` carries the normalized Taylor
coefficients ``f^(k)(x)/k!`` for k = 0..4.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
from mpmath.ctx_mp import MPContext

DEFAULT_DIGITS = 300
MIN_DIGITS = 50
DEGREE = 4


class NumericError(ArithmeticError):
    """Base class for arithmetic failures in jets and expressions."""


class DomainErrorJet(NumericError, ValueError):
    """A jet function was applied outside its real domain."""


class DivisionByZeroJet(NumericError, ZeroDivisionError):
    """Jet division by a series with zero constant term."""


@functools.lru_cache(maxsize=None)
def _context(decimal_digits: int) -> MPContext:
    ctx = MPContext()
    ctx.dps = decimal_digits
    return ctx


@dataclass(frozen=True)
class Precision:
    decimal_digits: int = DEFAULT_DIGITS

    def __post_init__(self) -> None:
        if int(self.decimal_digits) != self.decimal_digits or self.decimal_digits < MIN_DIGITS:
            raise ValueError(f"precision must be an integer >= {MIN_DIGITS} digits, got {self.decimal_digits}")

    @property
    def ctx(self) -> MPContext:
        # Shared per digit count; callers must never assign ctx.dps/ctx.prec.
        return _context(self.decimal_digits)

    def real(self, value) -> mpmath.mpf:
        """Convert ``value`` (str, int, Fraction, mpf) to a Real at this precision.

        Strings are rounded once, directly from decimal.
        """
        ctx = self.ctx
        if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, int):
            return ctx.mpf(value.numerator) / value.denominator
        return ctx.mpf(value)

    def doubled(self) -> "Precision":
        return Precision(2 * self.decimal_digits)

    def floor(self, offset: int) -> mpmath.mpf:
        """Return ``10**(offset - decimal_digits)``."""
        return self.ctx.mpf(10) ** (offset - self.decimal_digits)


def precision_of(x: mpmath.mpf) -> Precision:
    """Recover the :class:`Precision` a Real was created under."""
    return Precision(x.context.dps)


def ulp(x: mpmath.mpf) -> mpmath.mpf:
    ctx = x.context
    if not x:
        return ctx.ldexp(1, -ctx.prec)
    return ctx.ldexp(1, ctx.mag(x) - ctx.prec)


def format_sci(x: mpmath.mpf, digits: int = 30) -> str:
    """Scientific notation with exactly ``digits`` significant digits.

    Independent of locale and of mpmath's fixed/scientific switching.
    """
    if not x:
        return "0." + "0" * (digits - 1) + "e+0"
    sign, ds, exponent = mpmath.libmp.libmpf.to_digits_exp(x._mpf_, digits)
    if len(ds) > digits:  # rounding carried into a new digit
        ds = ds[:digits]
    text = f"{ds[0]}.{ds[1:]}e{exponent:+d}"
    return ("-" if sign else "") + text


# --------------------------------------------------------------------- jets


@dataclass(frozen=True)
class Jet4:
    coeffs: tuple

    def __post_init__(self) -> None:
        if len(self.coeffs) != DEGREE + 1:
            raise ValueError("Jet4 needs exactly 5 coefficients")

    @property
    def ctx(self) -> MPContext:
        return self.coeffs[0].context

    @property
    def value(self) -> mpmath.mpf:
        return self.coeffs[0]

    def derivative(self, k: int) -> mpmath.mpf:
        """Return the raw k-th derivative ``k! * coeffs[k]``."""
        return self.coeffs[k] * math.factorial(k)

    def is_constant(self) -> bool:
        return not any(self.coeffs[1:])

    def __getitem__(self, k: int) -> mpmath.mpf:
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __neg__(self) -> "Jet4":
        return Jet4(tuple(-c for c in self.coeffs))

    def __add__(self, other: "Jet4") -> "Jet4":
        return Jet4(tuple(a + b for a, b in zip(self.coeffs, _lift(other, self.ctx).coeffs)))

    def __sub__(self, other: "Jet4") -> "Jet4":
        return Jet4(tuple(a - b for a, b in zip(self.coeffs, _lift(other, self.ctx).coeffs)))

    def __mul__(self, other: "Jet4") -> "Jet4":
        other = _lift(other, self.ctx)
        return Jet4(tuple(_cauchy(self.coeffs, other.coeffs, k, self.ctx) for k in range(DEGREE + 1)))

    def __truediv__(self, other: "Jet4") -> "Jet4":
        other = _lift(other, self.ctx)
        u, v = self.coeffs, other.coeffs
        if not v[0]:
            raise DivisionByZeroJet("division by a jet with zero constant term")
        w: list = []
        for k in range(DEGREE + 1):
            acc = u[k] - _dot(v[1 : k + 1], w[::-1], self.ctx)
            w.append(acc / v[0])
        return Jet4(tuple(w))

    def __pow__(self, other: "Jet4") -> "Jet4":
        return jet_pow(self, _lift(other, self.ctx))

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other) -> "Jet4":
        return _lift(other, self.ctx) - self

    def __rtruediv__(self, other) -> "Jet4":
        return _lift(other, self.ctx) / self


def _dot(a: Sequence, b: Sequence, ctx: MPContext):
    total = ctx.zero
    for x, y in zip(a, b):
        total += x * y
    return total


def _cauchy(u: Sequence, v: Sequence, k: int, ctx: MPContext):
    # Pairs j and k-j are added first so that swapping u and v rounds identically.
    total = ctx.zero
    for j in range(k // 2 + 1):
        if 2 * j == k:
            total += u[j] * v[j]
        else:
            total += u[j] * v[k - j] + u[k - j] * v[j]
    return total


def _lift(value, ctx: MPContext) -> Jet4:
    if isinstance(value, Jet4):
        return value
    return jet_constant(ctx.convert(value))


def jet_constant(c: mpmath.mpf) -> Jet4:
    z = c.context.zero
    return Jet4((c, z, z, z, z))


def jet_variable(x: mpmath.mpf) -> Jet4:
    """The identity function expanded at ``x``: ``[x, 1, 0, 0, 0]``."""
    ctx = x.context
    z = ctx.zero
    return Jet4((x, ctx.one, z, z, z))


def jet_from(values: Iterable, precision: Precision) -> Jet4:
    return Jet4(tuple(precision.real(v) for v in values))


def _is_integer(c: mpmath.mpf) -> bool:
    return c == c.context.floor(c)


def _int_pow(base: Jet4, n: int) -> Jet4:
    if n < 0:
        return jet_constant(base.ctx.one) / _int_pow(base, -n)
    result = jet_constant(base.ctx.one)
    square = base
    while n:
        if n & 1:
            result = result * square
        n >>= 1
        if n:
            square = square * square
    return result


def _real_pow(base: Jet4, r: mpmath.mpf) -> Jet4:
    # w_k = 1/(k u0) * sum_{j=1..k} (r j - (k - j)) u_j w_{k-j}
    u = base.coeffs
    ctx = base.ctx
    w = [ctx.power(u[0], r)]
    for k in range(1, DEGREE + 1):
        acc = ctx.zero
        for j in range(1, k + 1):
            acc += (r * j - (k - j)) * u[j] * w[k - j]
        w.append(acc / (k * u[0]))
    return Jet4(tuple(w))


def real_pow(a: mpmath.mpf, b: mpmath.mpf) -> mpmath.mpf:
    """Scalar power shared by the real and jet evaluators (caller checks domain)."""
    if _is_integer(b):
        return a ** int(b)
    return a.context.power(a, b)


def jet_pow(base: Jet4, exponent: Jet4) -> Jet4:
    out = _jet_pow(base, exponent)
    # Keep the value term identical to the scalar evaluation.
    return Jet4((real_pow(base.value, exponent.value),) + out.coeffs[1:])


def _jet_pow(base: Jet4, exponent: Jet4) -> Jet4:
    if exponent.is_constant():
        r = exponent.value
        if _is_integer(r):
            if r < 0 and not base.value:
                raise DivisionByZeroJet("zero raised to a negative power")
            return _int_pow(base, int(r))
        if base.value <= 0:
            raise DomainErrorJet("non-integer power of a non-positive base")
        return _real_pow(base, r)
    if base.value <= 0:
        raise DomainErrorJet("variable exponent requires a positive base")
    return jet_func("exp", exponent * jet_func("ln", base))


def _exp(u: Sequence, ctx: MPContext) -> list:
    w = [ctx.exp(u[0])]
    for k in range(1, DEGREE + 1):
        w.append(sum((j * u[j] * w[k - j] for j in range(1, k + 1)), ctx.zero) / k)
    return w


def _ln(u: Sequence, ctx: MPContext) -> list:
    if u[0] <= 0:
        raise DomainErrorJet("ln of a non-positive value")
    w = [ctx.ln(u[0])]
    for k in range(1, DEGREE + 1):
        acc = sum((j * w[j] * u[k - j] for j in range(1, k)), ctx.zero) / k
        w.append((u[k] - acc) / u[0])
    return w


def _sin_cos(u: Sequence, ctx: MPContext) -> tuple[list, list]:
    s = [ctx.sin(u[0])]
    c = [ctx.cos(u[0])]
    for k in range(1, DEGREE + 1):
        s.append(sum((j * u[j] * c[k - j] for j in range(1, k + 1)), ctx.zero) / k)
        c.append(-sum((j * u[j] * s[k - j] for j in range(1, k + 1)), ctx.zero) / k)
    return s, c


def _sqrt(u: Sequence, ctx: MPContext) -> list:
    if u[0] <= 0:
        raise DomainErrorJet("sqrt needs a positive constant term")
    w = [ctx.sqrt(u[0])]
    for k in range(1, DEGREE + 1):
        acc = sum((w[j] * w[k - j] for j in range(1, k)), ctx.zero)
        w.append((u[k] - acc) / (2 * w[0]))
    return w


FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")


def jet_func(name: str, arg: Jet4) -> Jet4:
    """Compose an elementary function with a jet (truncated at degree 4)."""
    ctx, u = arg.ctx, arg.coeffs
    if name == "exp":
        w = _exp(u, ctx)
    elif name == "ln":
        w = _ln(u, ctx)
    elif name == "sin":
        w = _sin_cos(u, ctx)[0]
    elif name == "cos":
        w = _sin_cos(u, ctx)[1]
    elif name == "sqrt":
        w = _sqrt(u, ctx)
    else:
        raise ValueError(f"unknown function {name!r}")
    return Jet4(tuple(w))


_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow": jet_pow,
    "neg": lambda a, b: -a,
}


def jet_arith(op: str, lhs: Jet4, rhs: Jet4 | None = None) -> Jet4:
    """Combine jets by name; ``rhs`` is ignored for ``neg``."""
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None
    return fn(lhs, rhs)
