import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavereduce.exprcore import UnknownFunctionError
from wavereduce.solutions import (
    CORRECTED_VARIANT, NoConvergenceError, NullConditionError, ROOT_TOL, SingularJacobianError,
    SolutionError, build_q_operator, make_family, make_rank0, make_rank1, make_shared_rank2,
    make_sobolev, resolve_parameters, select_branch, tau_values, track,
)
from wavereduce.minkowski import contract_numeric

CIRCLE = ("1", "cos(p)", "sin(p)")
CIRCLE_S = ("1", "-cos(s)", "-sin(s)")


# -- rank 0


def test_rank0_null_pair():
    f = make_rank0(("1", "1", "0"), "0", ("1", "-1", "0"), "0")
    assert f.h == 2 and f.tag == "lie"


def test_rank0_rejects_non_null():
    with pytest.raises(NullConditionError):
        make_rank0(("1", "0", "0"), "0", ("1", "-1", "0"), "0")


def test_rank0_rational_null_vectors():
    f = make_rank0(("1", "3/5", "4/5"), "0", ("1", "-3/5", "-4/5"), "0")
    assert f.h == 2


def test_rank0_resolves_directly():
    f = make_rank0(("1", "1", "0"), "2", ("1", "-1", "0"), "0")
    (pt,) = resolve_parameters(f, (0.5, 1.0, -3.0))
    assert pt.p == () and pt.v == pytest.approx(3.5) and pt.w == pytest.approx(-0.5)


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_rank0_constant_h_for_any_null_pair(a, b):
    A = (1, math.cos(a), math.sin(a))
    C = (1, math.cos(b), math.sin(b))
    f = make_rank0([repr(c) for c in A], "0", [repr(c) for c in C], "0")
    assert f.h == pytest.approx(1 - math.cos(a - b), abs=1e-12)


# -- rank 1


def test_rank1_circle_is_null():
    f = make_rank1(CIRCLE, "0", CIRCLE_S, "0")
    assert f.v_side.rank == 1 and f.v_side.periodic == (True,)


def test_rank1_rejects_non_null():
    with pytest.raises(NullConditionError):
        make_rank1(("1", "p", "0"), "0", CIRCLE_S, "0")


def test_function_outside_grammar():
    with pytest.raises(UnknownFunctionError):
        make_rank1(("cosh(p)", "sinh(p)", "0"), "0", CIRCLE_S, "0")


def test_rank1_needs_parameters():
    with pytest.raises(SolutionError):
        make_rank1(("1", "1", "0"), "0", CIRCLE_S, "0")


def test_rank1_two_roots():
    f = make_rank1(CIRCLE, "0", CIRCLE_S, "0")
    roots = f.v_side.roots((0.0, 1.0, 0.0))
    got = sorted(r.params[0] for r in roots)
    assert got == pytest.approx([0.0, math.pi], abs=1e-9)


def test_rank1_singular_locus():
    f = make_rank1(CIRCLE, "0", CIRCLE_S, "0")
    with pytest.raises(SingularJacobianError):
        f.v_side.roots((0.7, 0.0, 0.0))


def test_no_convergence():
    # d/dp (exp(p) x1 + exp(p) x0 ...) never vanishes for this x
    f = make_rank1(("exp(p)", "exp(p)", "0"), "0", CIRCLE_S, "0")
    with pytest.raises(NoConvergenceError):
        f.v_side.roots((1.0, 1.0, 0.0))


points = st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)).filter(
    lambda x: math.hypot(x[1], x[2]) > 1e-2)


@given(points)
def test_rank1_roots_satisfy_constraint(x):
    f = make_rank1(CIRCLE, "0", CIRCLE_S, "0")
    pts = resolve_parameters(f, x)
    assert len(pts) == 4  # two roots on each side
    for r in pts:
        assert r.residual <= ROOT_TOL
        assert abs(f.v_side.residual(r.p, x)[0]) <= ROOT_TOL
        A = f.v_side.gradient(r.p)
        assert abs(contract_numeric(A, A)) <= 1e-12


@given(points)
def test_rank1_roots_distinct(x):
    f = make_rank1(CIRCLE, "0", CIRCLE_S, "0")
    roots = f.v_side.roots(x)
    ps = [r.params[0] for r in roots]
    d = abs(ps[0] - ps[1])
    assert min(d, 2 * math.pi - d) > 1e-6


def test_select_and_track():
    f = make_rank1(CIRCLE, "0", CIRCLE_S, "0")
    x = (0.3, 1.0, 0.5)
    pts = resolve_parameters(f, x)
    hi = select_branch(pts, "max")
    lo = select_branch(pts, "min")
    assert hi.v >= lo.v
    moved = track(f, hi, (0.3, 1.001, 0.5))
    assert moved is not None and abs(moved.p[0] - hi.p[0]) < 1e-2
    with pytest.raises(SolutionError):
        select_branch([], "max")


def test_rank2_linear_parameters():
    f = make_family(2, ("1", "cos(p1)", "sin(p1)"), "p2", ("1", "-cos(s1)", "-sin(s1)"), "s2")
    assert f.v_side.rank == 2
    # p2 enters only through B, so its constraint d/dp2 = 1 never vanishes
    with pytest.raises(NoConvergenceError):
        f.v_side.roots((0.0, 1.0, 0.0))


# -- shared parameters


def test_shared_same_vector():
    A = ("1", "cos(p1)", "sin(p1)")
    f = make_shared_rank2(A, "0", A, "1")
    assert f.h == 0 and f.degenerate and f.tag == "hidden-symmetry"


def test_shared_dependent_h_rejected():
    with pytest.raises(SolutionError):
        make_shared_rank2(("1", "cos(p1)", "sin(p1)"), "0", ("1", "cos(p2)", "sin(p2)"), "0")


def test_shared_resolution_reports_w_constraint():
    A = ("1", "cos(p1)", "sin(p1)")
    C = ("-1", "-cos(p1)", "-sin(p1)")
    f = make_shared_rank2(A, "0", C, "0")
    pts = resolve_parameters(f, (0.2, 1.0, 0.4))
    assert pts and all(p.s == p.p for p in pts)
    assert all(p.w_constraint_residual <= 1e-10 for p in pts)


# -- Sobolev-type family


def test_sobolev_constant():
    fam = make_sobolev(("1", "cos(1/3)", "sin(1/3)"), "p1")
    assert set(fam.checks) == {"A.A", "A_p1.A_p1", "A_p1.A_p2", "A_p2.A_p2"}
    assert fam.checks["A_p1.A_p1"] is True


def test_sobolev_rejects_unit_derivative():
    with pytest.raises(NullConditionError):
        make_sobolev(("1", "cos(p1)", "sin(p1)"), "0")


def test_sobolev_proportional():
    fam = make_sobolev(("p1", "p1", "0"), "p2")
    assert fam.checks["A_p1.A_p1"] is True


# -- Q operator


def test_tau_printed_values():
    t1, t2, den = tau_values((1, 1, 0), (1, 0, 1))
    assert (t1, t2, den) == (-1, 1, 1)


def test_tau_parallel_rejected():
    with pytest.raises(SolutionError):
        tau_values((1, 1, 0), (2, 2, 0))


def test_rank0_q_variants():
    f = make_rank0(("1", "1", "0"), "0", ("1", "0", "1"), "0")
    (pt,) = resolve_parameters(f, (0.1, 0.2, 0.3))
    q = build_q_operator(f, pt)
    assert q.passing == [CORRECTED_VARIANT]
    assert q.audit_flag


@given(st.floats(0.1, 3.0), st.floats(3.3, 6.1))
def test_corrected_variant_for_every_rank0_pair(a, b):
    A = (1.0, math.cos(a), math.sin(a))
    C = (1.0, math.cos(b), math.sin(b))
    if abs(A[1] * C[2] - A[2] * C[1]) < 1e-3:
        return
    f = make_rank0([repr(c) for c in A], "0", [repr(c) for c in C], "0")
    (pt,) = resolve_parameters(f, (0.0, 0.0, 0.0))
    q = build_q_operator(f, pt)
    assert CORRECTED_VARIANT in q.passing
