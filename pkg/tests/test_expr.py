import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pvesym import expr as E
from pvesym.expr import Sym
from pvesym.parser import ParseError, parse

x, y, t = Sym("x"), Sym("y"), Sym("t")
NAMES = ("x", "y", "t")


# Random expression trees over x, y, t that are smooth everywhere.
leaves = st.one_of(
    st.sampled_from([x, y, t]),
    st.fractions(min_value=-5, max_value=5, max_denominator=7).map(E.Const),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: E.add(*p)),
        st.tuples(children, children).map(lambda p: E.mul(*p)),
        children.map(E.sin),
        children.map(E.cos),
        children.map(lambda c: E.exp(E.mul(E.Const(Fraction(1, 4)), E.sin(c)))),
        children.map(E.arctan),
        st.tuples(children, st.integers(0, 3)).map(lambda p: E.power(p[0], p[1])),
    )


exprs = st.recursive(leaves, _extend, max_leaves=8)
points = st.fixed_dictionaries({n: st.floats(-1.5, 1.5) for n in NAMES})


def close(a, b, rtol=1e-9, atol=1e-9):
    return abs(a - b) <= atol + rtol * max(abs(a), abs(b))


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_simplify_idempotent(e):
    once = E.simplify(e)
    assert E.simplify(once) == once


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_print_parse_round_trip(e):
    assert parse(str(e)) == e


@settings(max_examples=100, deadline=None)
@given(exprs, points, st.sampled_from(NAMES))
def test_derivative_matches_central_difference(e, pt, var):
    d = E.diff(e, var)
    h = 1e-5
    up = E.evaluate(e, {**pt, var: pt[var] + h})
    down = E.evaluate(e, {**pt, var: pt[var] - h})
    fd = (up - down) / (2 * h)
    exact = E.evaluate(d, pt)
    assert abs(fd - exact) <= 1e-4 * max(1.0, abs(exact))


@settings(max_examples=100, deadline=None)
@given(exprs, exprs, st.fractions(-3, 3, max_denominator=5), st.sampled_from(NAMES))
def test_diff_is_linear(f, g, k, var):
    lhs = E.diff(E.add(f, E.mul(E.Const(k), g)), var)
    rhs = E.add(E.diff(f, var), E.mul(E.Const(k), E.diff(g, var)))
    assert E.equal_expr(lhs, rhs).equal


@settings(max_examples=100, deadline=None)
@given(exprs, points)
def test_evaluation_agrees_with_lambdify(e, pt):
    f = E.lambdify(e, NAMES)
    assert close(float(f(*(pt[n] for n in NAMES))), E.evaluate(e, pt))


def test_canonical_form_collects_like_terms():
    assert E.add(x, x) == E.mul(2, x)
    assert E.add(E.mul(x, y), E.neg(E.mul(y, x))).is_zero
    assert E.power(E.add(x, 1), 2) == parse("x^2 + 2*x + 1")


def test_pythagorean_identity_folds():
    assert E.add(E.power(E.sin(x), 2), E.power(E.cos(x), 2)) == E.ONE


def test_exponentials_merge():
    assert E.mul(E.exp(x), E.exp(E.neg(x))) == E.ONE


def test_derivative_examples():
    assert E.diff(parse("x^3*sin(y)"), "x") == parse("3*x^2*sin(y)")
    assert E.diff(parse("arctan(x/y)"), "x") is not None
    assert E.equal_expr(E.diff(parse("arctan(x/y)"), "x"), parse("y/(x^2 + y^2)"),
                        ranges={"y": (0.5, 2)}).equal
    assert E.diff(parse("ln(t)"), "t") == parse("1/t")


def test_sqrt_stays_symbolic_and_fails_on_negative():
    e = parse("sqrt(F*a/(a + b))")
    assert "sqrt" in str(e) or "^(1/2)" in str(e)
    with pytest.raises(E.ExprDomainError):
        E.evaluate(e, {"F": -1.0, "a": 1.0, "b": 0.0})


def test_evaluate_needs_all_symbols():
    with pytest.raises(E.UnboundSymbolError):
        E.evaluate(parse("x + y"), {"x": 1.0})


def test_ln_domain():
    with pytest.raises(E.ExprDomainError):
        E.evaluate(parse("ln(x)"), {"x": -1.0})


def test_equal_expr_reports_method():
    assert E.equal_expr(parse("x + y"), parse("y + x")).method == "canonical"
    r = E.equal_expr(parse("sin(2*x)"), parse("2*sin(x)*cos(x)"))
    assert r.equal
    assert not E.equal_expr(parse("sin(x)"), parse("cos(x)")).equal


def test_subs_is_simultaneous():
    e = E.subs(parse("x + 2*y"), {"x": y, "y": x})
    assert e == parse("y + 2*x")


def test_to_fraction_uses_decimal_representation():
    assert E.to_fraction(0.1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        E.to_fraction(math.nan)


class TestParser:
    def test_precedence_and_unary_minus(self):
        assert parse("-x^2") == E.neg(E.power(x, 2))
        assert parse("2*x + 3*x") == E.mul(5, x)
        assert parse("x**2") == parse("x^2")

    def test_aliases(self):
        assert parse("log(x)") == E.ln(x)
        assert parse("atan(x)") == E.arctan(x)
        assert parse("ψ + β") == parse("psi + beta")

    def test_arctan2(self):
        e = parse("arctan2(y, x)")
        assert math.isclose(E.evaluate(e, {"x": -1.0, "y": 1.0}), 3 * math.pi / 4)

    def test_rational_literal(self):
        assert parse("0.25") == E.Const(Fraction(1, 4))
        assert parse("1e-3") == E.Const(Fraction(1, 1000))

    @pytest.mark.parametrize("text,pos", [("foo(x)", 0), ("x + * y", 4), ("(x + 1", 6), ("x $ y", 2)])
    def test_errors_carry_position(self, text, pos):
        with pytest.raises(ParseError) as err:
            parse(text)
        assert err.value.position == pos

    def test_unknown_function_message(self):
        with pytest.raises(ParseError, match="unknown function 'foo'"):
            parse("foo(x)")

    def test_symbolic_exponent_rejected(self):
        with pytest.raises(ParseError, match="rational constant"):
            parse("x^y")

    def test_division_by_zero(self):
        with pytest.raises(ParseError):
            parse("x/0")
