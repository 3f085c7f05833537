"""Univariate expression language.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'

Number literals keep their decimal text and are converted to a Real only at
evaluation time, at the evaluation precision.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import mpmath

from .numeric import (
    FUNCTIONS,
    Jet4,
    NumericError,
    jet_constant,
    jet_func,
    jet_pow,
    jet_variable,
    real_pow,
)

VARIABLE = "x"
CONSTANTS = ("pi", "e")


class ExprError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class LexError(ExprError):
    pass


class ParseError(ExprError):
    def __init__(self, position: int, expected: tuple[str, ...], found: str = "end of input"):
        super().__init__(f"expected {' or '.join(expected)}, found {found}", position)
        self.expected = expected


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r}", position)
        self.name = name


class EvalDomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain (ln/sqrt of non-positive, x/0, ...)."""


# ------------------------------------------------------------------ tokens


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_SINGLE = {
    "+": "plus",
    "-": "minus",
    "*": "star",
    "/": "slash",
    "^": "caret",
    "(": "lparen",
    ")": "rparen",
    ",": "comma",
}


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], ch, i))
            i += 1
            continue
        m = _NUMBER.match(source, i)
        if m and ch in "0123456789.":
            tokens.append(Token("number", m.group(), i))
            i = m.end()
            continue
        m = _IDENT.match(source, i)
        if m:
            tokens.append(Token("identifier", m.group(), i))
            i = m.end()
            continue
        raise LexError(f"unexpected character {ch!r}", len(source[:i].encode("utf-8")))
    return tokens


# --------------------------------------------------------------------- AST
# Positions are excluded from equality so round-trips compare structurally.


@dataclass(frozen=True)
class NumberLiteral:
    text: str
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Variable:
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Constant:
    name: str
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Expr"
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    argument: "Expr"
    position: int = field(default=0, compare=False)


Expr = Union[NumberLiteral, Variable, Constant, Unary, Binary, Call]

_BINOPS = {"plus": "add", "minus": "sub", "star": "mul", "slash": "div", "caret": "pow"}
_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


class _Parser:
    def __init__(self, tokens: list[Token], end: int):
        self.tokens = tokens
        self.i = 0
        self.end = end

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def fail(self, *expected: str):
        tok = self.peek()
        if tok is None:
            raise ParseError(self.end, expected)
        raise ParseError(tok.position, expected, repr(tok.text))

    def expect(self, kind: str, label: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.fail(label)
        self.i += 1
        return tok

    def expr(self) -> Expr:
        node = self.term()
        while (tok := self.peek()) is not None and tok.kind in ("plus", "minus"):
            self.i += 1
            node = Binary(_BINOPS[tok.kind], node, self.term(), tok.position)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while (tok := self.peek()) is not None and tok.kind in ("star", "slash"):
            self.i += 1
            node = Binary(_BINOPS[tok.kind], node, self.unary(), tok.position)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == "minus":
            self.i += 1
            return Unary("neg", self.unary(), tok.position)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok.kind == "caret":
            self.i += 1
            return Binary("pow", base, self.unary(), tok.position)
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok is None:
            self.fail("number", "identifier", "'('")
        if tok.kind == "number":
            self.i += 1
            return NumberLiteral(tok.text, tok.position)
        if tok.kind == "lparen":
            self.i += 1
            node = self.expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "identifier":
            self.i += 1
            name = tok.text
            if name == VARIABLE:
                return Variable(tok.position)
            if name in CONSTANTS:
                return Constant(name, tok.position)
            if name in FUNCTIONS:
                self.expect("lparen", "'('")
                arg = self.expr()
                self.expect("rparen", "')'")
                return Call(name, arg, tok.position)
            raise UnknownIdentifier(name, tok.position)
        self.fail("number", "identifier", "'('")


def parse(tokens: list[Token], source_length: int | None = None) -> Expr:
    """Build an AST from ``tokens``.

    ``source_length`` is the offset reported for errors at end of input; it
    defaults to just past the last token.
    """
    if source_length is None:
        source_length = tokens[-1].position + len(tokens[-1].text) if tokens else 0
    parser = _Parser(tokens, source_length)
    node = parser.expr()
    if parser.peek() is not None:
        parser.fail("operator", "end of input")
    return node


def parse_text(source: str) -> Expr:
    return parse(tokenize(source), len(source))


def format_expr(node: Expr) -> str:
    """Render ``node`` so that ``parse_text(format_expr(node)) == node``."""
    if isinstance(node, NumberLiteral):
        return node.text
    if isinstance(node, Variable):
        return VARIABLE
    if isinstance(node, Constant):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({format_expr(node.argument)})"
    if isinstance(node, Unary):
        return f"-{_wrap(node.child)}"
    return f"{_wrap(node.left)} {_SYMBOLS[node.op]} {_wrap(node.right)}"


def _wrap(node: Expr) -> str:
    text = format_expr(node)
    if isinstance(node, (Unary, Binary)):
        return f"({text})"
    return text


# -------------------------------------------------------------- evaluation


def eval_real(node: Expr, x: mpmath.mpf) -> mpmath.mpf:
    """Evaluate ``node`` at ``x`` in the precision context of ``x``."""
    ctx = x.context

    def ev(n: Expr):
        if isinstance(n, NumberLiteral):
            return ctx.mpf(n.text)
        if isinstance(n, Variable):
            return x
        if isinstance(n, Constant):
            return +ctx.pi if n.name == "pi" else +ctx.e
        if isinstance(n, Unary):
            return -ev(n.child)
        if isinstance(n, Call):
            v = ev(n.argument)
            if n.func in ("ln", "sqrt") and v <= 0:
                if n.func == "sqrt" and v == 0:
                    return ctx.zero
                raise EvalDomainError(f"{n.func} of non-positive value", n.position)
            return getattr(ctx, n.func)(v)
        a, b = ev(n.left), ev(n.right)
        if n.op == "add":
            return a + b
        if n.op == "sub":
            return a - b
        if n.op == "mul":
            return a * b
        if n.op == "div":
            if not b:
                raise EvalDomainError("division by zero", n.position)
            return a / b
        if not a and b < 0:
            raise EvalDomainError("zero raised to a negative power", n.position)
        if a < 0 and b != ctx.floor(b):
            raise EvalDomainError("non-integer power of a negative base", n.position)
        return real_pow(a, b)

    return ev(node)


def eval_jet(node: Expr, x: mpmath.mpf) -> Jet4:
    """Evaluate ``node`` on the identity jet at ``x``.

    Jet-level failures are reported as :class:`EvalDomainError` pointing at
    the offending node.
    """
    ctx = x.context
    var = jet_variable(x)

    def ev(n: Expr) -> Jet4:
        if isinstance(n, NumberLiteral):
            return jet_constant(ctx.mpf(n.text))
        if isinstance(n, Variable):
            return var
        if isinstance(n, Constant):
            return jet_constant(+ctx.pi if n.name == "pi" else +ctx.e)
        try:
            if isinstance(n, Unary):
                return -ev(n.child)
            if isinstance(n, Call):
                return jet_func(n.func, ev(n.argument))
            a, b = ev(n.left), ev(n.right)
            if n.op == "add":
                return a + b
            if n.op == "sub":
                return a - b
            if n.op == "mul":
                return a * b
            if n.op == "div":
                return a / b
            return jet_pow(a, b)
        except NumericError as exc:
            raise EvalDomainError(str(exc), n.position) from exc

    return ev(node)

