import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavereduce.exprcore import compile_expr, parse, simplify
from wavereduce.minkowski import box, grad_dot
from wavereduce.reduction import (
    AnsatzPair, CaseKind, ReductionError, assemble_reduced, closure_test, compute_conditions,
    rank_test, _case_at,
)

RADIAL = ("x0", "sqrt(x1^2 + x2^2)")


def system(y, z, n=2):
    return compute_conditions(AnsatzPair.from_text(y, z, n))


def coeffs(rs):
    return tuple(rs.conditions[k].yz_form() for k in ("r", "q", "s", "R", "S"))


def test_flat_pair():
    rs = system("x0", "x1")
    assert rs.case is CaseKind.HYPERBOLIC
    assert rs.all_closed
    assert coeffs(rs) == tuple(simplify(parse(t)) for t in ("1", "0", "-1", "0", "0"))


def test_radial_pair():
    rs = system(*RADIAL)
    assert rs.case is CaseKind.HYPERBOLIC and rs.all_closed
    assert rs.conditions["S"].closed_form == simplify(parse("-1/z"))


def test_product_pair_not_closed():
    rs = system("x0", "x1*x2")
    assert simplify(rs.s + parse("x1^2 + x2^2")) == parse("0")
    assert not rs.conditions["s"].closed
    assert rs.case is CaseKind.NOT_CLOSED
    with pytest.raises(ReductionError):
        assemble_reduced(rs, parse("phi"))


def test_closure_examples():
    a = AnsatzPair.from_text(*RADIAL, 2)
    assert closure_test(grad_dot(a.z, a.z, 2), a)
    assert closure_test(simplify(a.y**2 + a.z), a)
    b = AnsatzPair.from_text("x0", "x1*x2", 2)
    assert not closure_test(grad_dot(b.z, b.z, 2), b)


def test_rank_test_rejects_nearly_everywhere():
    b = AnsatzPair.from_text("x0", "x1*x2", 2)
    rt = rank_test(grad_dot(b.z, b.z, 2), b)
    assert rt.closed_fraction <= 0.1


def test_classify_labels():
    assert _case_at(1, 0, -1) is CaseKind.HYPERBOLIC
    assert _case_at(0, 2, 0) is CaseKind.HYPERBOLIC
    assert _case_at(0, 0, 0) is CaseKind.FIRST_ORDER
    assert _case_at(0, 0, -4) is CaseKind.PARABOLIC
    assert _case_at(-1, 0, -1) is CaseKind.ELLIPTIC
    assert CaseKind.HYPERBOLIC.label == "hyperbolic (rs-q^2 < 0)"


def test_null_coordinates():
    rs = system("x0+x1", "x0-x1")
    assert coeffs(rs)[:3] == (parse("0"), parse("2"), parse("0"))
    assert rs.case is CaseKind.HYPERBOLIC


def test_parabolic_and_elliptic_pairs():
    assert system("x0+x1", "x2").case is CaseKind.PARABOLIC
    assert system("x1", "x2").case is CaseKind.ELLIPTIC


def test_flat_reduced_equation():
    pde = assemble_reduced(system("x0", "x1"), parse("phi^3"))
    assert pde.text() == "phi_yy - phi_zz = phi^3"


def test_radial_reduced_equation():
    pde = assemble_reduced(system(*RADIAL), parse("phi"))
    assert pde.text() == "phi_yy - phi_zz - 1/z*phi_z = phi"
    assert pde.apply(parse("y")) == simplify(parse("-y"))


def test_radial_runtime():
    t = time.perf_counter()
    system(*RADIAL)
    assert time.perf_counter() - t < 5


PAIRS = [("x0", "x1"), RADIAL, ("x0+x1", "x0-x1"), ("x0+x1", "x2"), ("x1", "x2"),
         ("x0", "x1^2+x2^2"), ("x0+x1", "x0+x1+x2^2")]


@pytest.mark.parametrize("y,z", PAIRS)
def test_closed_forms_agree_with_x_forms(y, z):
    rs = system(y, z)
    a = rs.ansatz
    fy, fz = compile_expr(a.y, a.coordinates), compile_expr(a.z, a.coordinates)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.3, 2, size=(30, 3))
    for c in rs.conditions.values():
        assert c.closed
        if c.closed_form is None:
            continue
        fx = compile_expr(c.x_form, a.coordinates)
        fc = compile_expr(c.closed_form, ("y", "z"))
        for x in pts:
            want = fx(*x)
            assert abs(fc(fy(*x), fz(*x)) - want) <= 1e-9 * (1 + abs(want))


@pytest.mark.parametrize("y,z", PAIRS)
def test_reduced_coefficients_reproduce_operators(y, z):
    rs = system(y, z)
    a = rs.ansatz
    pde = assemble_reduced(rs, parse("0"))
    want = {
        "phi_yy": grad_dot(a.y, a.y, 2), "phi_yz": simplify(2 * grad_dot(a.y, a.z, 2)),
        "phi_zz": grad_dot(a.z, a.z, 2), "phi_y": box(a.y, 2), "phi_z": box(a.z, 2),
    }
    fy, fz = compile_expr(a.y, a.coordinates), compile_expr(a.z, a.coordinates)
    rng = np.random.default_rng(1)
    for key, expr in want.items():
        fx = compile_expr(expr, a.coordinates)
        coef = pde.coefficients[key]
        for x in rng.uniform(0.3, 2, size=(10, 3)):
            yz = {"y": fy(*x), "z": fz(*x)}
            names = ("y", "z") + a.coordinates
            got = compile_expr(coef, names)(yz["y"], yz["z"], *x)
            assert abs(got - fx(*x)) <= 1e-9 * (1 + abs(fx(*x)))


@pytest.mark.parametrize("y,z", PAIRS[:5])
def test_classify_swap_invariant(y, z):
    assert system(y, z).case is system(z, y).case


@given(st.integers(-4, 4).filter(bool), st.integers(-3, 3), st.sampled_from(PAIRS))
def test_classify_affine_invariant(a, b, pair):
    y, z = pair
    assert system(f"{a}*({y}) + {b}", z).case is system(y, z).case


def test_constant_rejected():
    with pytest.raises(ReductionError):
        AnsatzPair.from_text("x1 - x1", "x2", 2)


def test_independence():
    assert AnsatzPair.from_text(*RADIAL, 2).check_independent()
    assert not AnsatzPair.from_text("x0+x1", "2*x0+2*x1", 2).check_independent()
