import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from exprgen import NAMES, exprs, random_exprs
from wavereduce.exprcore import (
    DomainError, ParseError, UnboundSymbolError, UnknownFunctionError, UnknownIdentifierError,
    VarSpace, compile_expr, depends_on, diff, dual_evaluate, evaluate, free_symbols, parse,
    sample_points, simplify, to_text,
)

SPACE = VarSpace(2)


def P(text):
    return parse(text, SPACE)


def same_value(a, b, names=("x0", "x1", "x2"), n=20, tol=1e-10):
    rng = np.random.default_rng(3)
    fa, fb = compile_expr(a, names), compile_expr(b, names)
    for pt in rng.uniform(-2, 2, size=(n, len(names))):
        x, y = fa(*pt), fb(*pt)
        assert abs(x - y) <= tol * (1 + abs(x))


# -- parsing


def test_parse_binary_tree():
    e = P("x0^2 - x1^2")
    assert e.kind == "sub"
    assert [a.kind for a in e.args] == ["pow", "pow"]
    assert evaluate(e, {"x0": 2, "x1": 1}) == 3


def test_parse_function_node():
    e = P("sqrt(x1^2 + x2^2)")
    assert e.kind == "fn" and e.value == "sqrt"


def test_unknown_function():
    with pytest.raises(UnknownFunctionError):
        P("foo(x0)")


def test_unknown_identifier_has_offset():
    with pytest.raises(UnknownIdentifierError) as err:
        P("x0 + q")
    assert err.value.offset == 5


def test_trailing_operator_reports_position():
    with pytest.raises(ParseError) as err:
        P("x0 +")
    assert err.value.offset == 4
    assert "offset 4" in str(err.value)


@pytest.mark.parametrize("text", ["(x0", "x0)", "x0 ** 2", "", "x0 $ 1", "sin x0"])
def test_malformed(text):
    with pytest.raises(ParseError):
        P(text)


def test_bare_exponent_is_integer():
    # x^2/3 reads as (x^2)/3; a fractional power needs parentheses
    assert simplify(P("x0^2/3")) == simplify(P("(x0^2)/3"))
    assert simplify(P("x0^(1/2)")) == simplify(P("sqrt(x0)"))


def test_rational_literals_exact():
    e = simplify(P("1/3 + 1/6"))
    assert e.kind == "num" and e.value == Fraction(1, 2)
    e = simplify(P("(2/3)^3 * 27"))
    assert e.value == 8


# -- differentiation


def test_diff_polynomial():
    assert simplify(diff(P("x0^2 - x1^2"), "x0")) == simplify(P("2*x0"))


def test_diff_chain_rule():
    got = diff(P("sqrt(x1^2 + x2^2)"), "x1")
    assert simplify(got - P("x1/sqrt(x1^2 + x2^2)")) == P("0")


@given(exprs(), st.sampled_from(NAMES), st.integers(0, 2**31))
def test_diff_matches_dual(e, var, seed):
    d = diff(e, var)
    rng = random.Random(seed)
    for _ in range(5):
        pt = {nm: rng.uniform(-2, 2) for nm in NAMES}
        try:
            want = dual_evaluate(e, pt, var)
            got = evaluate(d, pt)
        except (DomainError, OverflowError):
            continue
        assert abs(got - want.derivative) <= 1e-9 * max(1.0, abs(want.derivative))


# -- simplification


def test_pythagorean():
    assert simplify(parse("cos(p)^2 + sin(p)^2")) == P("1")


def test_zero_one_identities():
    assert simplify(P("0*x1 + x0")) == P("x0")
    assert simplify(P("1*x0^1 + 0")) == P("x0")


def test_difference_of_squares():
    assert simplify(P("(x0+x1)*(x0-x1) - x0^2 + x1^2")) == P("0")


def test_square_of_sum_terminates():
    e = simplify(parse("(u+2)^2 - u^2 - 4*u"))
    assert e == parse("4")


@given(exprs())
def test_simplify_preserves_value(e):
    s = simplify(e)
    rng = np.random.default_rng(11)
    for pt in rng.uniform(-2, 2, size=(100, 3)):
        env = dict(zip(NAMES, pt))
        try:
            a = evaluate(e, env)
        except (DomainError, OverflowError):
            continue
        b = evaluate(s, env)
        assert abs(a - b) <= 1e-10 * (1 + abs(a))


@given(exprs())
def test_round_trip(e):
    s = simplify(e)
    again = parse(to_text(s), SPACE)
    assert simplify(again) == s


@given(exprs())
def test_raw_print_parses_to_same_value(e):
    same_value(parse(to_text(e), SPACE), e)


# -- evaluation


def test_eval_examples():
    assert evaluate(P("x0^2 - x1^2"), {"x0": 2, "x1": 1}) == 3
    assert abs(evaluate(P("exp(log(x0))"), {"x0": 5}) - 5) <= 1e-12
    with pytest.raises(DomainError):
        evaluate(P("sqrt(x1)"), {"x1": -1})


def test_eval_unbound():
    with pytest.raises(UnboundSymbolError):
        evaluate(P("x0 + x1"), {"x0": 1})


@given(exprs())
def test_compiled_matches_tree_walk(e):
    f = compile_expr(e, NAMES)
    rng = np.random.default_rng(5)
    for pt in rng.uniform(-2, 2, size=(10, 3)):
        try:
            a = evaluate(e, dict(zip(NAMES, pt)))
        except (DomainError, OverflowError):
            continue
        assert math.isclose(f(*pt), a, rel_tol=1e-12, abs_tol=1e-12)


def test_depends_on():
    assert not depends_on(P("x0 + 1"), ["x1"])
    assert depends_on(P("sin(x1)"), ["x1"])
    assert not depends_on(P("x1 - x1"), ["x1"])


def test_free_symbols():
    assert free_symbols(P("x0*sin(x2) + 3")) == {"x0", "x2"}


def test_sampling_excludes_singular_tube():
    s = sample_points(["x0"], 200, checks=[P("1/x0")], box=(-1, 1), guard=0.1)
    assert s.accepted < 200
    assert all(abs(p[0]) > 0.1 for p in s.points)


def test_random_corpus_is_reproducible():
    a = [to_text(e) for e in random_exprs(5, 9)]
    b = [to_text(e) for e in random_exprs(5, 9)]
    assert a == b
