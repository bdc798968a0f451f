"""Parametric null-gradient families in 2+1 dimensions.

A family side is ``v = A_mu(p) x_mu + B(p)`` with plain summation over mu and
the parameters fixed pointwise by ``d v / d p_k = 0``.  Under that constraint
``grad v = A(p)``, so ``A_mu A_mu = 0`` (Minkowski) makes v a null function.
Parameter letters are ``p, p1, p2`` for v and ``s, s1, s2`` for w; a shared
family uses ``p1, p2`` on both sides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exprcore import (
    DEFAULT_SEED,
    ZERO,
    DomainError,
    Expr,
    as_expr,
    compile_expr,
    diff,
    free_symbols,
    parse,
    simplify,
    sym,
)
from .exprcore.nodes import ExprError
from .minkowski import contract

N_SPATIAL = 2
COORDS = ("x0", "x1", "x2")
SIGNATURE = (1, -1, -1)
NULL_TOL = 1e-10
ROOT_TOL = 1e-10
DISTINCT_TOL = 1e-6
MAX_NEWTON = 64
STEP_TOL = 1e-6
DEFAULT_SEEDS = tuple(2 * math.pi * k / 17 for k in range(17))
LINEAR_SEEDS = tuple(np.linspace(-4.0, 4.0, 17))
GRID_SEEDS_2D = 9
DENOM_TOL = 1e-10
Q_TOL = 1e-8

V_PARAMS = {0: (), 1: ("p",), 2: ("p1", "p2")}
W_PARAMS = {0: (), 1: ("s",), 2: ("s1", "s2")}


class SolutionError(ExprError):
    pass


class NullConditionError(SolutionError):
    pass


class NoConvergenceError(SolutionError):
    pass


class SingularJacobianError(SolutionError):
    pass


# ---------------------------------------------------------------- certification


def _param_samples(params, count=48, seed=DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    return rng.uniform(-3.0, 3.0, size=(count, len(params)))


def certify_zero(e: Expr, what: str, tol: float = NULL_TOL) -> bool:
    """Zero symbolically, or numerically at sampled parameter values."""
    e = simplify(e)
    if e is ZERO:
        return True
    params = sorted(free_symbols(e))
    f = compile_expr(e, params)
    worst = 0.0
    used = 0
    for pt in _param_samples(params):
        try:
            worst = max(worst, abs(f(*pt)))
            used += 1
        except DomainError:
            continue
    if used == 0 or worst > tol:
        raise NullConditionError(f"{what} does not vanish (found max |.| = {worst:.3e})")
    return False


def constant_value(e: Expr, tol: float = NULL_TOL):
    """(value, symbolic) if e is constant in params, else None."""
    e = simplify(e)
    names = sorted(free_symbols(e))
    if not names:
        return float(compile_expr(e, [])()), True
    f = compile_expr(e, names)
    vals = []
    for pt in _param_samples(names):
        try:
            vals.append(f(*pt))
        except DomainError:
            continue
    if vals and max(vals) - min(vals) <= tol * (1 + max(abs(x) for x in vals)):
        return float(np.mean(vals)), False
    return None


def _minkowski(a, b) -> Expr:
    return contract(a, b, SIGNATURE)


# ---------------------------------------------------------------- sides


def _is_periodic(exprs, param: str) -> bool:
    """Numeric 2*pi periodicity of every expression in ``param``."""
    others = sorted(set().union(*(free_symbols(e) for e in exprs)) - {param})
    names = [param] + others
    fs = [compile_expr(e, names) for e in exprs]
    rng = np.random.default_rng(7)
    for _ in range(5):
        pt = rng.uniform(-3, 3, size=len(names))
        shifted = pt.copy()
        shifted[0] += 2 * math.pi
        for f in fs:
            try:
                if abs(f(*pt) - f(*shifted)) > 1e-9 * (1 + abs(f(*pt))):
                    return False
            except DomainError:
                return False
    return True


@dataclass(frozen=True)
class Root:
    params: tuple
    residual: float
    cond: float


class FamilySide:
    """One implicit null function ``A(p) . x + B(p)`` with its constraints."""

    def __init__(self, A, B, params):
        self.A = tuple(simplify(as_expr(a)) for a in A)
        self.B = simplify(as_expr(B))
        if len(self.A) != N_SPATIAL + 1:
            raise SolutionError(f"A needs {N_SPATIAL + 1} components")
        allowed = set(params)
        used = set().union(*(free_symbols(e) for e in self.A + (self.B,)))
        if used - allowed:
            raise SolutionError(f"family components may depend only on {sorted(allowed)}; "
                                f"found {sorted(used - allowed)}")
        # parameters that actually appear drive the Newton dimension
        self.params = tuple(p for p in params if p in used)
        self.declared = tuple(params)
        x = [sym(c) for c in COORDS]
        self.V = simplify(sum((a * xi for a, xi in zip(self.A, x)), ZERO) + self.B)
        names = list(self.params) + list(COORDS)
        self._v = compile_expr(self.V, names)
        self._A = [compile_expr(a, list(self.params)) for a in self.A]
        self.constraints = tuple(diff(self.V, p) for p in self.params)
        self._g = [compile_expr(g, names) for g in self.constraints]
        self._H = [[compile_expr(diff(g, q), names) for q in self.params] for g in self.constraints]
        self.periodic = tuple(_is_periodic(self.A + (self.B,), p) for p in self.params)

    @property
    def rank(self) -> int:
        return len(self.params)

    def null_expr(self) -> Expr:
        return _minkowski(self.A, self.A)

    def value(self, params, x) -> float:
        return self._v(*params, *x)

    def gradient(self, params) -> np.ndarray:
        return np.array([f(*params) for f in self._A], dtype=float)

    def residual(self, params, x) -> np.ndarray:
        return np.array([g(*params, *x) for g in self._g], dtype=float)

    def jacobian(self, params, x) -> np.ndarray:
        return np.array([[h(*params, *x) for h in row] for row in self._H], dtype=float)

    def _seeds(self, seeds):
        if seeds is not None:
            seeds = [np.atleast_1d(np.asarray(s, dtype=float)) for s in seeds]
            if self.rank == 2 and all(len(s) == 1 for s in seeds):
                grid = [float(s[0]) for s in seeds]
                return [np.array([a, b]) for a in grid for b in grid]
            return seeds
        per = [DEFAULT_SEEDS if periodic else LINEAR_SEEDS for periodic in self.periodic]
        if self.rank == 1:
            return [np.array([s]) for s in per[0]]
        g0 = per[0][:: max(1, len(per[0]) // GRID_SEEDS_2D)][:GRID_SEEDS_2D]
        g1 = per[1][:: max(1, len(per[1]) // GRID_SEEDS_2D)][:GRID_SEEDS_2D]
        return [np.array([a, b]) for a in g0 for b in g1]

    def newton(self, x, p0):
        """Damped Newton from p0; returns (params, |g|, cond) or None."""
        p = np.array(p0, dtype=float)
        try:
            g = self.residual(p, x)
        except DomainError:
            return None
        for _ in range(MAX_NEWTON):
            norm = float(np.max(np.abs(g)))
            if norm <= 1e-14:
                break
            J = self.jacobian(p, x)
            try:
                step = np.linalg.solve(J, g)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(step)):
                return None
            t = 1.0
            while t > 1e-6:
                trial = p - t * step
                try:
                    gt = self.residual(trial, x)
                except DomainError:
                    t /= 2
                    continue
                if float(np.max(np.abs(gt))) < norm or t < 1e-3:
                    break
                t /= 2
            else:
                return None
            p, g = trial, gt
            if float(np.max(np.abs(t * step))) <= 1e-15 * (1 + float(np.max(np.abs(p)))):
                break
        J = self.jacobian(p, x)
        cond = float(np.linalg.cond(J))
        # a tiny residual far out on a decaying tail is not a root: the full
        # Newton step must be small as well
        try:
            last = float(np.max(np.abs(np.linalg.solve(J, g)))) if np.any(g) else 0.0
        except np.linalg.LinAlgError:
            last = 0.0  # left to the conditioning test in roots()
        if not last <= STEP_TOL * (1.0 + float(np.max(np.abs(p)))):
            return None
        return p, float(np.max(np.abs(g))), cond

    def canonical(self, p) -> tuple:
        return tuple(float(np.mod(v, 2 * math.pi)) if per else float(v)
                     for v, per in zip(p, self.periodic))

    def _distinct(self, a, b) -> bool:
        for u, w, per in zip(a, b, self.periodic):
            d = abs(u - w)
            if per:
                d = min(d, 2 * math.pi - d)
            if d > DISTINCT_TOL:
                return True
        return False

    def roots(self, x, seeds=None) -> list[Root]:
        x = np.asarray(x, dtype=float)
        if self.rank == 0:
            return [Root((), 0.0, 1.0)]
        seeds = self._seeds(seeds)
        if self._identically_zero(x, seeds):
            raise SingularJacobianError(f"constraint is identically zero in the parameters at x = {x.tolist()}")
        found: list[Root] = []
        singular = 0
        for s in seeds:
            out = self.newton(x, s)
            if out is None:
                continue
            p, res, cond = out
            if res > ROOT_TOL:
                continue
            if not np.isfinite(cond) or cond > 1e12:
                singular += 1
                continue
            p = self.canonical(p)
            if all(self._distinct(p, r.params) for r in found):
                found.append(Root(p, res, cond))
        if not found:
            if singular:
                raise SingularJacobianError(f"Jacobian singular at every root found at x = {x.tolist()}")
            raise NoConvergenceError(f"Newton did not converge from any of {len(seeds)} seeds at x = {x.tolist()}")
        found.sort(key=lambda r: r.params)
        return found

    def _identically_zero(self, x, seeds) -> bool:
        for s in seeds:
            try:
                if np.max(np.abs(self.residual(s, x))) > 1e-12:
                    return False
                if np.max(np.abs(self.jacobian(s, x))) > 1e-12:
                    return False
            except DomainError:
                return False
        return True

    def near(self, x, p0):
        """Track a branch: refine from a nearby root; None on failure."""
        out = self.newton(np.asarray(x, dtype=float), p0)
        if out is None or out[1] > ROOT_TOL:
            return None
        return out[0]


# ---------------------------------------------------------------- families


@dataclass
class NullFamily:
    rank: int
    A: tuple
    B: Expr
    C: tuple
    D: Expr
    shared_parameters: bool = False
    tag: str = ""
    h: float | None = None  # A_mu C_mu when constant
    h_expr: Expr | None = None
    degenerate: bool = False
    v_side: FamilySide = field(init=False, repr=False)
    w_side: FamilySide = field(init=False, repr=False)

    def __post_init__(self):
        vp = V_PARAMS[self.rank]
        wp = vp if self.shared_parameters else W_PARAMS[self.rank]
        self.v_side = FamilySide(self.A, self.B, vp)
        self.w_side = FamilySide(self.C, self.D, wp)
        self.A, self.B = self.v_side.A, self.v_side.B
        self.C, self.D = self.w_side.A, self.w_side.B
        certify_zero(self.v_side.null_expr(), "A_mu A_mu")
        certify_zero(self.w_side.null_expr(), "C_mu C_mu")
        self.h_expr = _minkowski(self.A, self.C)

    @property
    def v_expr(self) -> Expr:
        return self.v_side.V

    @property
    def w_expr(self) -> Expr:
        return self.w_side.V


def _consts(vals, n=3):
    out = tuple(simplify(as_expr(parse(v) if isinstance(v, str) else v)) for v in vals)
    if len(out) != n:
        raise SolutionError(f"expected {n} components")
    for e in out:
        if free_symbols(e):
            raise SolutionError("rank-0 components must be constants")
    return out


def make_rank0(A, B, C, D) -> NullFamily:
    A, C = _consts(A), _consts(C)
    (B,), (D,) = _consts([B], 1), _consts([D], 1)
    for name, vec in (("A", A), ("C", C)):
        val = float(compile_expr(_minkowski(vec, vec), [])())
        if abs(val) > 1e-12:
            raise NullConditionError(f"{name}_mu {name}_mu = {val:g} is not zero")
    fam = NullFamily(0, A, B, C, D, tag="lie")
    fam.h = float(compile_expr(fam.h_expr, [])())
    fam.degenerate = fam.h == 0.0
    return fam


def make_rank1(A, B, C, D) -> NullFamily:
    fam = NullFamily(1, _exprs(A), _expr(B), _exprs(C), _expr(D), tag="parametric")
    if fam.v_side.rank != 1 or fam.w_side.rank != 1:
        raise SolutionError("a rank-1 family needs p in (A, B) and s in (C, D)")
    return fam


def make_rank2(A, B, C, D) -> NullFamily:
    fam = NullFamily(2, _exprs(A), _expr(B), _exprs(C), _expr(D), tag="parametric")
    if fam.v_side.rank == 0 or fam.w_side.rank == 0:
        raise SolutionError("a rank-2 family needs parameters on both sides")
    return fam


def make_shared_rank2(A, B, C, D) -> NullFamily:
    fam = NullFamily(2, _exprs(A), _expr(B), _exprs(C), _expr(D), shared_parameters=True,
                     tag="hidden-symmetry")
    if fam.v_side.rank == 0:
        raise SolutionError("a shared family needs parameters in (A, B)")
    cv = constant_value(fam.h_expr)
    if cv is None:
        raise SolutionError("A_mu C_mu depends on the shared parameters")
    fam.h = cv[0]
    fam.degenerate = abs(cv[0]) <= NULL_TOL
    return fam


def make_family(rank: int, A, B, C, D, shared: bool = False) -> NullFamily:
    if rank == 0:
        return make_rank0(A, B, C, D)
    if shared:
        return make_shared_rank2(A, B, C, D)
    return make_rank1(A, B, C, D) if rank == 1 else make_rank2(A, B, C, D)


def _expr(e):
    return parse(e) if isinstance(e, str) else as_expr(e)


def _exprs(es):
    return tuple(_expr(e) for e in es)


# ---------------------------------------------------------------- resolution


@dataclass(frozen=True)
class ResolvedPoint:
    x: tuple
    p: tuple  # v-side parameter values
    s: tuple  # w-side parameter values (equal to p for shared families)
    v: float
    w: float
    cond: float
    residual: float
    w_constraint_residual: float = 0.0  # shared families: w constraints at p


def resolve_parameters(f: NullFamily, x, seeds=None) -> list[ResolvedPoint]:
    """All branches (distinct parameter roots) of the family at x."""
    x = tuple(float(c) for c in x)
    vr = f.v_side.roots(x, seeds)
    out = []
    if f.shared_parameters:
        for r in vr:
            wres = float(np.max(np.abs(f.w_side.residual(r.params, x)))) if f.w_side.rank else 0.0
            out.append(ResolvedPoint(x, r.params, r.params, f.v_side.value(r.params, x),
                                     f.w_side.value(r.params, x), r.cond, r.residual, wres))
        return out
    wr = f.w_side.roots(x, seeds)
    for a in vr:
        for b in wr:
            out.append(ResolvedPoint(x, a.params, b.params, f.v_side.value(a.params, x),
                                     f.w_side.value(b.params, x), max(a.cond, b.cond),
                                     max(a.residual, b.residual)))
    return out


def select_branch(points: list[ResolvedPoint], policy="max", key: str = "v") -> ResolvedPoint:
    """Choose one branch by index or by the largest/smallest v (or w)."""
    if not points:
        raise SolutionError("no branches to choose from")
    if isinstance(policy, int):
        return points[policy]
    get = (lambda r: r.v) if key == "v" else (lambda r: r.w)
    if policy == "max":
        return max(points, key=get)
    if policy == "min":
        return min(points, key=get)
    raise SolutionError(f"unknown branch policy {policy!r}")


def track(f: NullFamily, base: ResolvedPoint, x) -> ResolvedPoint | None:
    """The branch through ``base`` continued to a nearby point x."""
    x = tuple(float(c) for c in x)
    p = f.v_side.near(x, base.p) if f.v_side.rank else ()
    if p is None:
        return None
    if f.shared_parameters:
        s = p
    else:
        s = f.w_side.near(x, base.s) if f.w_side.rank else ()
        if s is None:
            return None
    p, s = tuple(p), tuple(s)
    return ResolvedPoint(x, p, s, f.v_side.value(p, x), f.w_side.value(s, x), base.cond, 0.0)


# ---------------------------------------------------------------- Sobolev family


@dataclass
class SobolevFamily:
    """u = A(p1, p2) . x + B with A null and all dA/dp_k mutually orthogonal
    and null; solves box u = 0, u_mu u_mu = 0."""

    A: tuple
    B: Expr
    checks: dict = field(default_factory=dict)  # constraint -> symbolic certificate
    side: FamilySide = field(init=False, repr=False)

    def __post_init__(self):
        self.side = FamilySide(self.A, self.B, V_PARAMS[2])
        self.A, self.B = self.side.A, self.side.B
        self.checks["A.A"] = certify_zero(self.side.null_expr(), "A_mu A_mu")
        for i, pk in enumerate(V_PARAMS[2]):
            for pm in V_PARAMS[2][i:]:
                dk = [diff(a, pk) for a in self.A]
                dm = [diff(a, pm) for a in self.A]
                label = f"A_{pk}.A_{pm}"
                self.checks[label] = certify_zero(_minkowski(dk, dm), label)

    @property
    def u_expr(self) -> Expr:
        return self.side.V


def make_sobolev(A, B) -> SobolevFamily:
    return SobolevFamily(_exprs(A), _expr(B))


# ---------------------------------------------------------------- Q operator

TAU_VARIANTS = {
    "printed": (1, 1),
    "flip_tau1": (-1, 1),
    "flip_tau2": (1, -1),
    "flip_both": (-1, -1),
}
CORRECTED_VARIANT = "flip_tau2"


def tau_exprs(A, C) -> tuple[Expr, Expr]:
    """The printed tau formulas as expressions in the components."""
    A0, A1, A2 = A
    C0, C1, C2 = C
    den = A1 * C2 - A2 * C1
    return simplify((C0 * A2 - A0 * C2) / den), simplify((C0 * A1 - A0 * C1) / den)


def tau_values(A, C):
    A0, A1, A2 = (float(a) for a in A)
    C0, C1, C2 = (float(c) for c in C)
    den = A1 * C2 - A2 * C1
    if abs(den) <= DENOM_TOL:
        raise SolutionError(f"A_1 C_2 - A_2 C_1 = {den:.3e} vanishes; Q is undefined")
    return (C0 * A2 - A0 * C2) / den, (C0 * A1 - A0 * C1) / den, den


@dataclass(frozen=True)
class QOperator:
    """Q = d0 + tau1 d1 + tau2 d2 at one resolved point."""

    x: tuple
    tau1: float  # printed formula
    tau2: float
    denominator: float
    invariance: dict  # variant -> max(|Qv|, |Qw|) using grad v = A, grad w = C
    audit_flag: bool  # printed fails, some sign variant passes

    def taus(self, variant: str = "printed") -> tuple[float, float]:
        a, b = TAU_VARIANTS[variant]
        return a * self.tau1, b * self.tau2

    @property
    def passing(self) -> list[str]:
        return [k for k, v in self.invariance.items() if v <= Q_TOL]


def q_apply(taus, grad) -> float:
    return float(grad[0] + taus[0] * grad[1] + taus[1] * grad[2])


def build_q_operator(f: NullFamily, at: ResolvedPoint) -> QOperator:
    A = f.v_side.gradient(at.p)
    C = f.w_side.gradient(at.s)
    t1, t2, den = tau_values(A, C)
    inv = {}
    for name, (a, b) in TAU_VARIANTS.items():
        taus = (a * t1, b * t2)
        inv[name] = max(abs(q_apply(taus, A)), abs(q_apply(taus, C)))
    flag = inv["printed"] > Q_TOL and any(v <= Q_TOL for v in inv.values())
    return QOperator(at.x, t1, t2, den, inv, flag)
