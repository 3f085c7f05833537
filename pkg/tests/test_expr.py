import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_derivative, relative_error
from orderfour.expr import (
    Binary,
    Call,
    Constant,
    EvalDomainError,
    LexError,
    NumberLiteral,
    ParseError,
    Unary,
    UnknownIdentifier,
    Variable,
    eval_jet,
    eval_real,
    format_expr,
    parse,
    parse_text,
    tokenize,
)
from orderfour.problems import PROBLEMS

CORPUS = [p.expr_text for p in PROBLEMS.values()] + [
    "x^2 - 4",
    "sqrt(x) * ln(x) - 1",
    "-x^2 + 2^x",
    "exp(x) / (1 + x*x)",
    "cos(x)^3 - x/e",
]


def kinds(source):
    return [(t.kind, t.text) for t in tokenize(source)]


class TestTokenize:
    def test_division(self):
        assert kinds("x/5") == [("identifier", "x"), ("slash", "/"), ("number", "5")]

    def test_embedment_coefficients(self):
        assert kinds("2.87*x^2") == [
            ("number", "2.87"),
            ("star", "*"),
            ("identifier", "x"),
            ("caret", "^"),
            ("number", "2"),
        ]

    def test_invalid_character(self):
        with pytest.raises(LexError) as info:
            tokenize("x $ 2")
        assert info.value.position == 2

    def test_exponent_literals(self):
        assert kinds("1e-3+.5+10.28E2") == [
            ("number", "1e-3"),
            ("plus", "+"),
            ("number", ".5"),
            ("plus", "+"),
            ("number", "10.28E2"),
        ]

    def test_positions_increase(self):
        positions = [t.position for t in tokenize(PROBLEMS["f2"].expr_text)]
        assert positions == sorted(set(positions))

    def test_non_ascii_offset_is_in_bytes(self):
        with pytest.raises(LexError) as info:
            tokenize("x+π")
        assert info.value.position == 2


class TestParse:
    def test_planck_function(self):
        tree = parse_text("exp(-x)-1+x/5")
        expected = Binary(
            "add",
            Binary("sub", Call("exp", Unary("neg", Variable())), NumberLiteral("1")),
            Binary("div", Variable(), NumberLiteral("5")),
        )
        assert tree == expected

    def test_power_is_right_associative(self, p60):
        tree = parse_text("2^3^2")
        assert tree == Binary("pow", NumberLiteral("2"), Binary("pow", NumberLiteral("3"), NumberLiteral("2")))
        assert eval_real(tree, p60.real(0)) == 512

    def test_unary_minus_below_power(self):
        assert parse_text("-x^2") == Unary("neg", Binary("pow", Variable(), NumberLiteral("2")))

    def test_power_accepts_signed_exponent(self):
        assert parse_text("x^-2") == Binary("pow", Variable(), Unary("neg", NumberLiteral("2")))

    def test_constants(self):
        assert parse_text("pi*e") == Binary("mul", Constant("pi"), Constant("e"))

    def test_trailing_operator(self):
        with pytest.raises(ParseError) as info:
            parse_text("2*")
        assert info.value.position == 2

    @pytest.mark.parametrize("source,position", [("(x+1", 4), ("x 2", 2), ("sin x", 4), ("exp(x,1)", 5), ("", 0)])
    def test_malformed(self, source, position):
        with pytest.raises(ParseError) as info:
            parse_text(source)
        assert info.value.position == position
        assert info.value.expected

    @pytest.mark.parametrize("source", ["y + 1", "tan(x)", "x * foo"])
    def test_unknown_identifier(self, source):
        with pytest.raises(UnknownIdentifier):
            parse_text(source)

    def test_parse_takes_tokens(self):
        assert parse(tokenize("x+1")) == parse_text("x+1")


class TestEvalReal:
    def test_planck_at_five(self, p300):
        value = eval_real(parse_text(PROBLEMS["f1"].expr_text), p300.real(5))
        assert abs(value - p300.ctx.exp(-5)) < p300.floor(5)
        assert abs(value - 6.7379e-3) < 1e-7

    def test_square_at_zero(self, p60):
        assert eval_real(parse_text("x^2"), p60.real(0)) == 0

    def test_embedment_at_doubled_precision(self, p300, p600):
        tree = parse_text(PROBLEMS["f2"].expr_text)
        lo = eval_real(tree, p300.real("2.5"))
        hi = eval_real(tree, p600.real("2.5"))
        assert relative_error(p600.real(lo), hi) <= 1e-290

    @pytest.mark.parametrize("source,x", [("ln(x)", "0"), ("sqrt(x)", "-1"), ("1/x", "0"), ("x^0.5", "-2"), ("x^-1", "0")])
    def test_domain_errors(self, p60, source, x):
        with pytest.raises(EvalDomainError) as info:
            eval_real(parse_text(source), p60.real(x))
        assert info.value.position >= 0

    def test_domain_error_points_at_node(self, p60):
        with pytest.raises(EvalDomainError) as info:
            eval_real(parse_text("1 + ln(x)"), p60.real(-1))
        assert info.value.position == 4

    def test_sqrt_of_zero(self, p60):
        assert eval_real(parse_text("sqrt(x)"), p60.real(0)) == 0


class TestEvalJet:
    def test_planck_slope(self, p300):
        jet = eval_jet(parse_text(PROBLEMS["f1"].expr_text), p300.real(5))
        assert abs(jet[1] - (-p300.ctx.exp(-5) + p300.real(1) / 5)) < p300.floor(5)

    def test_identity(self, p60):
        x = p60.real("1.25")
        assert list(eval_jet(parse_text("x"), x)) == [x, 1, 0, 0, 0]

    def test_pythagorean_identity(self, p300):
        jet = eval_jet(parse_text("sin(x)*sin(x) + cos(x)*cos(x)"), p300.real("1.3"))
        assert abs(jet[0] - 1) < p300.floor(5)
        for k in range(1, 5):
            assert abs(jet[k]) < p300.floor(5)

    def test_domain_error_is_wrapped(self, p60):
        with pytest.raises(EvalDomainError) as info:
            eval_jet(parse_text("2 * ln(x)"), p60.real(-3))
        assert info.value.position == 4

    @pytest.mark.parametrize("source", CORPUS)
    def test_value_matches_eval_real(self, p60, source):
        tree = parse_text(source)
        rng = random.Random(source)
        for _ in range(200):
            x = p60.real(rng.uniform(0.2, 6.0))
            assert eval_jet(tree, x)[0] == eval_real(tree, x)

    @pytest.mark.parametrize("pid", sorted(PROBLEMS))
    def test_slope_matches_finite_differences(self, p300, p600, pid):
        problem = PROBLEMS[pid]
        tree = problem.expr
        lo, hi = (p300.real(b) for b in problem.bracket)
        for i in range(7):
            x = lo + (hi - lo) * i / 6
            slope = eval_jet(tree, x)[1]
            reference = central_derivative(lambda t: eval_real(tree, t), x, 1, p600)
            assert relative_error(p600.real(slope), reference) <= 1e-20


# -------------------------------------------------------------- round trip

leaves = st.one_of(
    st.builds(Variable),
    st.sampled_from(["pi", "e"]).map(Constant),
    st.sampled_from(["1", "2.87", "10.28", "4.62", "1e-3", "0.5", ".25"]).map(NumberLiteral),
)


def _extend(children):
    return st.one_of(
        st.builds(Unary, st.just("neg"), children),
        st.builds(Binary, st.sampled_from(["add", "sub", "mul", "div", "pow"]), children, children),
        st.builds(Call, st.sampled_from(["exp", "ln", "sin", "cos", "sqrt"]), children),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_format_then_parse_round_trips(tree):
    assert parse_text(format_expr(tree)) == tree


@pytest.mark.parametrize("source", CORPUS + ["-x^2", "2^3^2", "(-x)^2", "-(-x)", "x-(1-x)", "x/(2/x)"])
def test_corpus_round_trips(source):
    tree = parse_text(source)
    assert parse_text(format_expr(tree)) == tree
