"""Reduction conditions for the ansatz u = phi(y, z).

Substituting the ansatz into box(u) = F(u) gives

    r phi_yy + 2 q phi_yz + s phi_zz + R phi_y + S phi_z = F(phi)

with r = y_mu y_mu, q = y_mu z_mu, s = z_mu z_mu, R = box(y), S = box(z).
The reduction is genuine only when all five close over (y, z).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import minkowski
from .exprcore import (
    DEFAULT_SEED,
    DomainError,
    Expr,
    SamplingError,
    VarSpace,
    compile_expr,
    diff,
    free_symbols,
    parse,
    sample_points,
    simplify,
    substitute,
    sym,
    to_text,
)
from .exprcore.nodes import ExprError, _make, num
from .exprcore.simplify import _split_multiple, c_add, c_mul, c_pow, split_coeff

DEFAULT_SAMPLES = 64
RANK_RTOL = 1e-8
PARABOLIC_TOL = 1e-10
REWRITE_TOL = 1e-9

CONDITION_NAMES = ("r", "q", "s", "R", "S")
Y, Z = sym("y"), sym("z")


class ReductionError(ExprError):
    pass


class CaseKind(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    FIRST_ORDER = "first-order"
    MIXED = "mixed"
    NOT_CLOSED = "not-closed"

    @property
    def label(self) -> str:
        return _CASE_LABELS[self]


_CASE_LABELS = {
    CaseKind.ELLIPTIC: "elliptic (rs-q^2 > 0)",
    CaseKind.HYPERBOLIC: "hyperbolic (rs-q^2 < 0)",
    CaseKind.PARABOLIC: "parabolic (rs-q^2 = 0, r^2+s^2+q^2 != 0)",
    CaseKind.FIRST_ORDER: "first-order (r = s = q = 0)",
    CaseKind.MIXED: "mixed (sign of rs-q^2 varies)",
    CaseKind.NOT_CLOSED: "not closed over (y, z)",
}


@dataclass(frozen=True)
class AnsatzPair:
    y: Expr
    z: Expr
    space: VarSpace

    def __post_init__(self):
        coords = set(self.space.coordinates)
        for label, e in (("y", self.y), ("z", self.z)):
            extra = free_symbols(e) - coords
            if extra:
                raise ReductionError(f"{label} may only use coordinates, found {sorted(extra)}")
            if not (free_symbols(simplify(e)) & coords):
                raise ReductionError(f"{label} is constant")

    @classmethod
    def from_text(cls, y: str, z: str, n: int) -> "AnsatzPair":
        space = VarSpace(n)
        return cls(simplify(parse(y, space)), simplify(parse(z, space)), space)

    @property
    def coordinates(self) -> tuple[str, ...]:
        return self.space.coordinates

    def check_independent(self, samples: int = 16, seed: int = DEFAULT_SEED) -> bool:
        """Jacobian of (y, z) has rank 2 at most sampled points."""
        grads = _gradient_funcs([self.y, self.z], self.coordinates)
        pts = sample_points(self.coordinates, samples, [self.y, self.z], seed=seed,
                            max_excluded_fraction=1.0)
        good = 0
        for x in pts.points:
            try:
                m = np.array([[g(*x) for g in row] for row in grads])
            except DomainError:
                continue
            sv = np.linalg.svd(m, compute_uv=False)
            good += bool(sv[0] > 0 and sv[-1] > RANK_RTOL * sv[0])
        return good > pts.accepted // 2


@dataclass(frozen=True)
class RankTest:
    accepted: int
    excluded: int
    closed_points: int

    @property
    def closed_fraction(self) -> float:
        return self.closed_points / self.accepted if self.accepted else 0.0

    @property
    def closed(self) -> bool:
        return self.accepted > 0 and self.closed_points == self.accepted


@dataclass
class Condition:
    name: str
    x_form: Expr
    closed_form: Expr | None
    rank: RankTest

    @property
    def closed(self) -> bool:
        return self.rank.closed

    @property
    def numeric_only(self) -> bool:
        """Closure established by the rank test, but no (y, z) formula was found."""
        return self.closed and self.closed_form is None

    def yz_form(self) -> Expr:
        return self.closed_form if self.closed_form is not None else self.x_form


@dataclass
class ReductionSystem:
    ansatz: AnsatzPair
    conditions: dict = field(default_factory=dict)
    case: CaseKind = CaseKind.NOT_CLOSED

    @property
    def r(self) -> Expr:
        return self.conditions["r"].x_form

    @property
    def q(self) -> Expr:
        return self.conditions["q"].x_form

    @property
    def s(self) -> Expr:
        return self.conditions["s"].x_form

    @property
    def R_box(self) -> Expr:
        return self.conditions["R"].x_form

    @property
    def S_box(self) -> Expr:
        return self.conditions["S"].x_form

    @property
    def closure_ok(self) -> dict:
        return {k: c.closed for k, c in self.conditions.items()}

    @property
    def all_closed(self) -> bool:
        return all(self.closure_ok.values())


@dataclass
class ReducedPDE:
    """r phi_yy + 2q phi_yz + s phi_zz + R phi_y + S phi_z = F(phi) in (y, z)."""

    coefficients: dict  # "phi_yy", "phi_yz", "phi_zz", "phi_y", "phi_z" -> Expr
    F: Expr
    numeric_only: tuple = ()  # coefficients left in x-form

    def apply(self, phi: Expr) -> Expr:
        """Residual of the reduced equation for phi(y, z), as an expression."""
        c = self.coefficients
        lhs = c_add([
            c_mul([c["phi_yy"], diff(diff(phi, "y"), "y")]),
            c_mul([c["phi_yz"], diff(diff(phi, "y"), "z")]),
            c_mul([c["phi_zz"], diff(diff(phi, "z"), "z")]),
            c_mul([c["phi_y"], diff(phi, "y")]),
            c_mul([c["phi_z"], diff(phi, "z")]),
        ])
        rhs = substitute(self.F, {"phi": phi})
        return simplify(c_add([lhs, c_mul([num(-1), rhs])]))

    def text(self) -> str:
        parts = []
        for key in ("phi_yy", "phi_yz", "phi_zz", "phi_y", "phi_z"):
            coef = self.coefficients[key]
            if coef.is_zero:
                continue
            c, rest = split_coeff(coef)
            if rest.is_one and c in (1, -1):
                term = key if c == 1 else f"-{key}"
            elif coef.kind == "add":
                term = f"({to_text(coef)})*{key}"
            else:
                term = f"{to_text(coef)}*{key}"
            parts.append(term)
        lhs = " + ".join(parts) if parts else "0"
        lhs = lhs.replace("+ -", "- ")
        return f"{lhs} = {to_text(self.F)}"


# -- operations ------------------------------------------------------------


def _gradient_funcs(exprs, names, guard: float = 0.0):
    return [[compile_expr(diff(e, x), names, guard) for x in names] for e in exprs]


def rank_test(cond: Expr, a: AnsatzPair, samples: int = DEFAULT_SAMPLES,
              seed: int = DEFAULT_SEED, box=(-2.0, 2.0)) -> RankTest:
    """Count sampled points where grad(cond) lies in span{grad y, grad z}.

    Points where grad y and grad z are themselves (numerically) parallel, or
    where any of the expressions is singular, are excluded.
    """
    names = a.coordinates
    exprs = [cond, a.y, a.z]
    grads = _gradient_funcs(exprs, names, guard=1e-3)
    try:
        pts = sample_points(names, samples, exprs, seed=seed, box=box, max_excluded_fraction=1.0)
    except SamplingError:
        pts = None
    if pts is None or pts.accepted == 0:
        raise SamplingError("degenerate sampling: every point hit a singular locus")
    accepted = closed = 0
    for x in pts.points:
        try:
            m = np.array([[g(*x) for g in row] for row in grads])
        except DomainError:
            continue
        yz = np.linalg.svd(m[1:], compute_uv=False)
        if yz[0] == 0 or yz[-1] <= RANK_RTOL * yz[0]:
            continue
        sv = np.linalg.svd(m, compute_uv=False)
        accepted += 1
        if sv[2] <= RANK_RTOL * sv[0]:
            closed += 1
    if accepted == 0:
        raise SamplingError("degenerate sampling: y and z are dependent at every sampled point")
    return RankTest(accepted, samples - accepted, closed)


def closure_test(cond: Expr, a: AnsatzPair, samples: int = DEFAULT_SAMPLES,
                 seed: int = DEFAULT_SEED) -> bool:
    return rank_test(cond, a, samples, seed).closed


def compute_conditions(a: AnsatzPair, samples: int = DEFAULT_SAMPLES,
                       seed: int = DEFAULT_SEED) -> ReductionSystem:
    ctx = minkowski.MetricContext(a.space)
    forms = {
        "r": minkowski.grad_dot(a.y, a.y, ctx),
        "q": minkowski.grad_dot(a.y, a.z, ctx),
        "s": minkowski.grad_dot(a.z, a.z, ctx),
        "R": minkowski.box(a.y, ctx),
        "S": minkowski.box(a.z, ctx),
    }
    system = ReductionSystem(a)
    for name in CONDITION_NAMES:
        xf = forms[name]
        rt = rank_test(xf, a, samples, seed)
        closed_form = rewrite_in_yz(xf, a, seed=seed) if rt.closed else None
        system.conditions[name] = Condition(name, xf, closed_form, rt)
    system.case = classify(system, samples, seed)
    return system


def classify(rs: ReductionSystem, samples: int = DEFAULT_SAMPLES,
             seed: int = DEFAULT_SEED) -> CaseKind:
    if not all(rs.conditions[k].closed for k in ("r", "q", "s")):
        return CaseKind.NOT_CLOSED
    names = rs.ansatz.coordinates
    r, q, s = rs.r, rs.q, rs.s
    if all(e.kind == "num" for e in (r, q, s)):
        return _case_at(float(r.value), float(q.value), float(s.value))
    fr, fq, fs = (compile_expr(e, names) for e in (r, q, s))
    pts = sample_points(names, samples, [r, q, s, rs.ansatz.y, rs.ansatz.z], seed=seed)
    seen = set()
    for x in pts.points:
        seen.add(_case_at(fr(*x), fq(*x), fs(*x)))
    if len(seen) == 1:
        return seen.pop()
    return CaseKind.MIXED


def _case_at(r: float, q: float, s: float) -> CaseKind:
    disc = r * s - q * q
    norm = r * r + s * s + q * q
    if norm <= PARABOLIC_TOL:
        return CaseKind.FIRST_ORDER
    if abs(disc) <= PARABOLIC_TOL:
        return CaseKind.PARABOLIC
    return CaseKind.ELLIPTIC if disc > 0 else CaseKind.HYPERBOLIC


def assemble_reduced(rs: ReductionSystem, F: Expr) -> ReducedPDE:
    bad = [k for k, ok in rs.closure_ok.items() if not ok]
    if bad:
        raise ReductionError(f"reduction invalid: {', '.join(bad)} not closed over (y, z)")
    c = rs.conditions
    coeffs = {
        "phi_yy": c["r"].yz_form(),
        "phi_yz": simplify(c_mul([num(2), c["q"].yz_form()])),
        "phi_zz": c["s"].yz_form(),
        "phi_y": c["R"].yz_form(),
        "phi_z": c["S"].yz_form(),
    }
    numeric = tuple(k for k in CONDITION_NAMES if c[k].numeric_only)
    return ReducedPDE(coeffs, simplify(F), numeric)


# -- rewriting in terms of (y, z) ------------------------------------------


def rewrite_in_yz(cond: Expr, a: AnsatzPair, seed: int = DEFAULT_SEED) -> Expr | None:
    """Try to express an x-expression through y and z; None when no formula is found.

    Candidates come from solving for coordinates that enter y or z linearly
    and from matching subtrees built from y or z; each is accepted only after
    a numeric comparison at sampled points.
    """
    coords = set(a.coordinates)
    cond = simplify(cond)
    if not (free_symbols(cond) & coords):
        return cond
    for cand in _candidates(cond, a):
        if free_symbols(cand) & coords:
            continue
        if _agrees(cond, cand, a, seed):
            return cand
    return None


def _candidates(cond: Expr, a: AnsatzPair):
    yield _match_subtrees(cond, [(a.z, Z), (a.y, Y)])
    for solved in _linear_solutions(a):
        yield _match_subtrees(substitute(cond, solved), [(a.z, Z), (a.y, Y)])


def _linear_solutions(a: AnsatzPair):
    """Substitutions x_i -> f(y, z, other x) from coordinates entering y or z linearly."""
    coords = a.coordinates
    lin = {}
    for label, e, target in (("y", a.y, Y), ("z", a.z, Z)):
        for x in coords:
            d = diff(e, x)
            if d.kind == "num" and d.value != 0:
                lin.setdefault(label, []).append((x, d, e, target))
    for label in ("y", "z"):
        for x, d, e, target in lin.get(label, []):
            # e = d*x + rest with rest free of x
            rest = simplify(c_add([e, c_mul([num(-1), d, sym(x)])]))
            if x in free_symbols(rest):
                continue
            yield {x: simplify(c_mul([c_add([target, c_mul([num(-1), rest])]), c_pow(d, -1)]))}
    ys, zs = lin.get("y", []), lin.get("z", [])
    for xy, dy, ey, _ in ys:
        for xz, dz, ez, _ in zs:
            if xy == xz:
                continue
            # solve the 2x2 linear system in (xy, xz) when both enter linearly in y and z
            a11, a12 = dy, diff(ey, xz)
            a21, a22 = diff(ez, xy), dz
            if not all(t.kind == "num" for t in (a11, a12, a21, a22)):
                continue
            det = a11.value * a22.value - a12.value * a21.value
            if det == 0:
                continue
            ry = simplify(c_add([ey, c_mul([num(-a11.value), sym(xy)]), c_mul([num(-a12.value), sym(xz)])]))
            rz = simplify(c_add([ez, c_mul([num(-a21.value), sym(xy)]), c_mul([num(-a22.value), sym(xz)])]))
            if {xy, xz} & (free_symbols(ry) | free_symbols(rz)):
                continue
            by = c_add([Y, c_mul([num(-1), ry])])
            bz = c_add([Z, c_mul([num(-1), rz])])
            inv = Fraction(1) / det if isinstance(det, Fraction) else 1.0 / det
            sx = simplify(c_mul([num(inv), c_add([c_mul([a22, by]), c_mul([num(-a12.value), bz])])]))
            sz = simplify(c_mul([num(inv), c_add([c_mul([num(-a21.value), by]), c_mul([a11, bz])])]))
            yield {xy: sx, xz: sz}


def _match_subtrees(cond: Expr, targets) -> Expr:
    memo: dict = {}

    def walk(node):
        got = memo.get(node)
        if got is not None:
            return got
        out = None
        for expr, symbol in targets:
            out = _match_one(node, expr, symbol)
            if out is not None:
                break
        if out is None:
            if node.kind in ("num", "sym"):
                out = node
            else:
                new = tuple(walk(c) for c in node.args)
                out = node if new == node.args else _make(node.kind, node.value, new)
        memo[node] = out
        return out

    return simplify(walk(cond))


def _match_one(node: Expr, target: Expr, symbol: Expr):
    if node is target:
        return symbol
    if target.kind == "pow":
        base, k0 = target.args[0], target.value
        if node.kind == "pow" and node.args[0] is base:
            return c_pow(symbol, node.value / k0)
        if node is base:
            return c_pow(symbol, 1 / k0)
        if node.kind == "add" and base.kind == "add":
            rem = _split_multiple(node, base)
            if rem is not None:
                c, rest = rem
                return c_add([c_mul([num(c), c_pow(symbol, 1 / k0)]), rest])
    if target.kind == "add" and node.kind == "add":
        rem = _split_multiple(node, target)
        if rem is not None:
            c, rest = rem
            return c_add([c_mul([num(c), symbol]), rest])
    return None


def _agrees(cond: Expr, cand: Expr, a: AnsatzPair, seed: int) -> bool:
    names = a.coordinates
    f = compile_expr(cond, names)
    g = compile_expr(cand, ["y", "z"])
    fy, fz = compile_expr(a.y, names), compile_expr(a.z, names)
    try:
        pts = sample_points(names, 32, [cond, _in_x(cand, a)], seed=seed + 1)
    except SamplingError:
        return False
    if pts.accepted == 0:
        return False
    for x in pts.points:
        try:
            lhs = f(*x)
            rhs = g(fy(*x), fz(*x))
        except DomainError:
            return False
        if abs(lhs - rhs) > REWRITE_TOL * (1 + abs(lhs)):
            return False
    return True


def _in_x(cand: Expr, a: AnsatzPair) -> Expr:
    return substitute(cand, {"y": a.y, "z": a.z})
