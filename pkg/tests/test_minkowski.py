import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from exprgen import exprs
from wavereduce.exprcore import VarSpace, compile_expr, parse, simplify, sym
from wavereduce.minkowski import MetricContext, box, contract_numeric, grad_dot

S2 = VarSpace(2)
COORDS = S2.coordinates


def P(t, space=S2):
    return simplify(parse(t, space))


def test_box_quadratic_form():
    # 2 from the time part, plus 2 from the minus sign on the space part
    assert box(parse("x0^2 - x1^2", VarSpace(1)), 1) == P("4")
    assert box(parse("x0^2 + x1^2", VarSpace(1)), 1) == P("0")


def test_box_mixed_term():
    assert box(P("x0*x1"), 2) == P("0")


def test_box_radial_distance():
    got = box(P("sqrt(x1^2 + x2^2)"), 2)
    assert simplify(got + P("1/sqrt(x1^2 + x2^2)")) == P("0")


def test_grad_dot_examples():
    assert grad_dot(P("x0"), P("x0"), 2) == P("1")
    assert grad_dot(P("x1"), P("x1"), 2) == P("-1")
    assert grad_dot(P("x0+x1"), P("x0-x1"), 2) == P("2")
    assert grad_dot(P("x0+x1"), P("x0+x1"), 2) == P("0")


def test_signature():
    ctx = MetricContext.of_dim(3)
    assert ctx.signature == (1, -1, -1, -1)
    for i, a in enumerate(ctx.coordinates):
        for j, b in enumerate(ctx.coordinates):
            want = 0 if i != j else (1 if i == 0 else -1)
            assert grad_dot(sym(a), sym(b), ctx) == P(str(want), VarSpace(3))


def test_contract_numeric():
    assert contract_numeric([1, 1, 0], [1, -1, 0]) == 2


@given(st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_box_of_linear_form_vanishes(cs):
    e = P(f"{cs[0]}*x0 + {cs[1]}*x1 + {cs[2]}*x2 + {cs[3]}")
    assert box(e, 2) == P("0")


def _numeric_equal(a, b, n=20):
    fa, fb = compile_expr(a, COORDS), compile_expr(b, COORDS)
    rng = np.random.default_rng(2)
    for x in rng.uniform(-2, 2, size=(n, 3)):
        va, vb = fa(*x), fb(*x)
        assert abs(va - vb) <= 1e-10 * (1 + abs(va))


@given(exprs(depth=3), exprs(depth=3), exprs(depth=3))
def test_bilinearity(a, b, c):
    lhs = grad_dot(a + b, c, 2)
    rhs = simplify(grad_dot(a, c, 2) + grad_dot(b, c, 2))
    _numeric_equal(lhs, rhs)


@given(exprs(depth=3), exprs(depth=3))
def test_symmetry(a, b):
    _numeric_equal(grad_dot(a, b, 2), grad_dot(b, a, 2))
