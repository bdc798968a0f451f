"""Residual checks at sampled points.

Explicit sources (expressions in x) are differentiated symbolically.
Parametric sources are resolved per point via the family constraints; their
gradients come from the closed form grad v = A(p) and second derivatives
from central differences along the tracked branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

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
    sample_points,
    simplify,
    substitute,
)
from .exprcore.nodes import ExprError
from .minkowski import MetricContext, box, grad_dot
from .reduction import CaseKind
from .solutions import (
    CORRECTED_VARIANT,
    TAU_VARIANTS,
    NullFamily,
    ROOT_TOL,
    QOperator,
    ResolvedPoint,
    SolutionError,
    resolve_parameters,
    select_branch,
    tau_values,
    track,
)

SYMBOLIC_TOL = 1e-8
FD_TOL = 1e-4
FD_STEP = 1e-5
BRANCH_JUMP = 0.1
MAX_EXCLUDED = 0.5


class VerifyError(ExprError):
    pass


class BranchDiscontinuityError(VerifyError):
    pass


# ---------------------------------------------------------------- reports


@dataclass
class ConditionResidual:
    max_abs: float
    mean_abs: float
    count: int
    excluded: int
    tol: float
    symbolic: bool | None = None  # True when the residual simplified to 0

    @property
    def passed(self) -> bool:
        return self.count > 0 and self.max_abs <= self.tol


@dataclass
class ResidualReport:
    requested: int
    conditions: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.conditions) and all(c.passed for c in self.conditions.values())

    @property
    def max_residual(self) -> float:
        return max((c.max_abs for c in self.conditions.values()), default=0.0)

    def as_dict(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "requested_points": self.requested,
            "conditions": {
                name: {
                    "max_abs": c.max_abs,
                    "mean_abs": c.mean_abs,
                    "points": c.count,
                    "excluded": c.excluded,
                    "tol": c.tol,
                    "symbolic_zero": c.symbolic,
                    "verdict": "pass" if c.passed else "fail",
                }
                for name, c in self.conditions.items()
            },
            "notes": list(self.notes),
        }


def _summarize(values, requested: int, tol: float, symbolic=None) -> ConditionResidual:
    vals = np.abs(np.asarray(values, dtype=float))
    if len(vals) == 0:
        return ConditionResidual(math.inf, math.inf, 0, requested, tol, symbolic)
    return ConditionResidual(float(vals.max()), float(vals.mean()), len(vals),
                             requested - len(vals), tol, symbolic)


def timelike_points(n: int, count: int, seed: int = DEFAULT_SEED, margin=(0.5, 2.0)) -> np.ndarray:
    """Points inside the future light cone: x0 = |x| + uniform(margin)."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1.0, 1.0, size=(count, n))
    x0 = np.linalg.norm(xs, axis=1) + rng.uniform(*margin, size=count)
    return np.column_stack([x0, xs])


# ---------------------------------------------------------------- sources


@dataclass(frozen=True)
class FamilySource:
    """One side of a null family, resolved on a chosen branch."""

    family: NullFamily
    side: str = "v"  # "v" or "w"
    policy: object = "max"


def _as_source(s):
    if isinstance(s, (FamilySource, Expr)):
        return s
    if isinstance(s, NullFamily):
        raise VerifyError("wrap a family in FamilySource(family, side)")
    return as_expr(s)


class _Branches:
    """Pointwise branch selection shared by all sources of one family."""

    def __init__(self):
        self.cache: dict = {}

    def base(self, src: "FamilySource", x) -> ResolvedPoint:
        key = (id(src.family), tuple(x))
        if key not in self.cache:
            self.cache[key] = resolve_parameters(src.family, x)
        # only the source's own side matters, so pick by that side's value
        return select_branch(self.cache[key], src.policy, src.side)


def _jump(a, b, fam: NullFamily) -> float:
    out = 0.0
    for side, u, w in (("v", a.p, b.p), ("w", a.s, b.s)):
        per = (fam.v_side if side == "v" else fam.w_side).periodic
        for x, y, pr in zip(u, w, per):
            d = abs(x - y)
            if pr:
                d = min(d % (2 * math.pi), 2 * math.pi - d % (2 * math.pi))
            out = max(out, d)
    return out


class _Point:
    """Values of every source at x and along the stencil around x."""

    def __init__(self, sources: dict, x, branches: _Branches, n: int):
        self.sources = sources
        self.x = np.asarray(x, dtype=float)
        self.branches = branches
        self.n = n
        self.bases = {}
        for name, s in sources.items():
            if isinstance(s, FamilySource):
                self.bases[name] = branches.base(s, self.x)

    def _fn(self, e: Expr):
        return _compiled(e, self.n)

    def values_at(self, y, stencil: bool) -> dict:
        out = {}
        for name, s in self.sources.items():
            if isinstance(s, FamilySource):
                base = self.bases[name]
                r = base if not stencil else track(s.family, base, y)
                if r is None:
                    raise BranchDiscontinuityError(f"branch lost inside the stencil at {self.x.tolist()}")
                if stencil and _jump(base, r, s.family) > BRANCH_JUMP:
                    raise BranchDiscontinuityError(f"parameter jump inside the stencil at {self.x.tolist()}")
                out[name] = r.v if s.side == "v" else r.w
            else:
                out[name] = self._fn(s)(*y)
        return out

    def closed_gradient(self, name) -> np.ndarray:
        s = self.sources[name]
        if isinstance(s, FamilySource):
            base = self.bases[name]
            side = s.family.v_side if s.side == "v" else s.family.w_side
            return side.gradient(base.p if s.side == "v" else base.s)
        return np.array([self._fn(diff(s, f"x{i}"))(*self.x) for i in range(self.n + 1)])

    def fd_box(self, func) -> float:
        """Central-difference box of func(values dict)."""
        c = func(self.values_at(self.x, False))
        total = 0.0
        for mu in range(self.n + 1):
            h = FD_STEP * (1.0 + abs(self.x[mu]))
            e = np.zeros(self.n + 1)
            e[mu] = h
            up = func(self.values_at(self.x + e, True))
            dn = func(self.values_at(self.x - e, True))
            total += (1 if mu == 0 else -1) * (up - 2 * c + dn) / (h * h)
        return total

    def fd_gradient(self, name) -> np.ndarray:
        g = np.zeros(self.n + 1)
        for mu in range(self.n + 1):
            h = FD_STEP * (1.0 + abs(self.x[mu]))
            e = np.zeros(self.n + 1)
            e[mu] = h
            g[mu] = (self.values_at(self.x + e, True)[name] - self.values_at(self.x - e, True)[name]) / (2 * h)
        return g


@lru_cache(maxsize=512)
def _compiled(e: Expr, n: int):
    return compile_expr(e, _x_names(n))


def _x_names(n):
    return [f"x{i}" for i in range(n + 1)]


def _draw(n, points, seed, box_, checks=()) -> tuple[np.ndarray, int, int]:
    """(accepted points, requested, excluded by the singular tube)."""
    names = _x_names(n)
    if isinstance(points, int):
        s = sample_points(names, points, checks, seed=seed, box=box_)
    else:
        s = sample_points(names, 0, checks, candidates=np.asarray(points, dtype=float))
    return s.points, s.requested, s.excluded


def _resolve_points(sources, pts, n, requested, notes):
    """Build _Point objects, excluding points where resolution fails."""
    branches = _Branches()
    good, failed = [], 0
    for x in pts:
        try:
            good.append(_Point(sources, x, branches, n))
        except SolutionError as e:
            failed += 1
            if len(notes) < 5:
                notes.append(f"resolution failed: {e}")
    if requested and (requested - len(good)) / requested >= MAX_EXCLUDED and failed:
        raise VerifyError(f"parameter resolution failed at {failed} of {requested} points")
    return good


# ---------------------------------------------------------------- composed solutions


@dataclass(frozen=True)
class ComposedSolution:
    """u = phi(sources) tested against box u = F(u)."""

    n: int
    sources: dict  # name -> Expr in x0..xn or FamilySource
    phi: Expr
    F: Expr = ZERO

    def __post_init__(self):
        object.__setattr__(self, "sources", {k: _as_source(v) for k, v in self.sources.items()})
        object.__setattr__(self, "phi", as_expr(self.phi))
        object.__setattr__(self, "F", as_expr(self.F))
        extra = free_symbols(self.phi) - set(self.sources)
        if extra:
            raise VerifyError(f"phi uses {sorted(extra)} with no source")
        if free_symbols(self.F) - {"u"}:
            raise VerifyError("F may depend only on u")
        xs = set(_x_names(self.n))
        for name, s in self.sources.items():
            if isinstance(s, Expr) and free_symbols(s) - xs:
                raise VerifyError(f"source {name} may depend only on {sorted(xs)}")
            if isinstance(s, FamilySource) and self.n != 2:
                raise VerifyError("parametric families live in n = 2")

    @property
    def symbolic(self) -> bool:
        return all(isinstance(s, Expr) for s in self.sources.values())

    def u_expr(self) -> Expr:
        return simplify(substitute(self.phi, self.sources))


def check_composed(cs: ComposedSolution, points=64, tol: float | None = None,
                   seed: int = DEFAULT_SEED, box_=(-2.0, 2.0)) -> ResidualReport:
    if cs.symbolic:
        return _composed_symbolic(cs, points, SYMBOLIC_TOL if tol is None else tol, seed, box_)
    return _composed_fd(cs, points, FD_TOL if tol is None else tol, seed, box_)


def _composed_symbolic(cs, points, tol, seed, box_):
    u = cs.u_expr()
    res = simplify(box(u, cs.n) - substitute(cs.F, {"u": u}))
    pts, requested, excluded = _draw(cs.n, points, seed, box_, [res, u])
    f = compile_expr(res, _x_names(cs.n))
    vals = [f(*x) for x in pts]
    rep = ResidualReport(requested)
    rep.conditions["box u - F(u)"] = _summarize(vals, requested, tol, res is ZERO)
    rep.notes.append("route: symbolic derivatives")
    return rep


def _composed_fd(cs, points, tol, seed, box_):
    pts, requested, _ = _draw(cs.n, points, seed, box_)
    rep = ResidualReport(requested)
    good = _resolve_points(cs.sources, pts, cs.n, requested, rep.notes)
    phi = compile_expr(cs.phi, list(cs.sources))
    F = compile_expr(cs.F, ["u"])
    names = list(cs.sources)
    u_of = lambda vals: phi(*(vals[k] for k in names))  # noqa: E731
    vals = []
    for P in good:
        u0 = u_of(P.values_at(P.x, False))
        vals.append(P.fd_box(u_of) - F(u0))
    rep.conditions["box u - F(u)"] = _summarize(vals, requested, tol)
    rep.notes.append(f"route: central differences, step {FD_STEP:g}*(1+|x|)")
    return rep


# ---------------------------------------------------------------- reduction conditions


@dataclass(frozen=True)
class CandidateSystem:
    """Two sources and targets for v.v, w.w, v.w, box v, box w as
    expressions in (v, w)."""

    n: int
    v: object
    w: object
    targets: dict
    kind: CaseKind = CaseKind.HYPERBOLIC

    def __post_init__(self):
        object.__setattr__(self, "v", _as_source(self.v))
        object.__setattr__(self, "w", _as_source(self.w))
        t = {k: simplify(as_expr(e)) for k, e in self.targets.items()}
        for k, e in t.items():
            if free_symbols(e) - {"v", "w"}:
                raise VerifyError(f"target {k} may depend only on v, w")
        object.__setattr__(self, "targets", t)

    @classmethod
    def hyperbolic(cls, n, v, w, h, V=ZERO, W=ZERO):
        return cls(n, v, w, {"v.v": ZERO, "w.w": ZERO, "v.w": h, "box v": V, "box w": W})

    @classmethod
    def parabolic(cls, n, v, w, lam, V=ZERO, W=ZERO):
        return cls(n, v, w, {"v.v": lam, "w.w": ZERO, "v.w": ZERO, "box v": V, "box w": W},
                   CaseKind.PARABOLIC)

    @classmethod
    def first_order(cls, n, v, w, V=ZERO, W=ZERO):
        return cls(n, v, w, {"v.v": ZERO, "w.w": ZERO, "v.w": ZERO, "box v": V, "box w": W},
                   CaseKind.FIRST_ORDER)

    @property
    def symbolic(self) -> bool:
        return isinstance(self.v, Expr) and isinstance(self.w, Expr)


_PAIRS = {"v.v": ("v", "v"), "w.w": ("w", "w"), "v.w": ("v", "w")}


def check_conditions(sys: CandidateSystem, points=64, tol: float | None = None,
                     seed: int = DEFAULT_SEED, box_=(-2.0, 2.0)) -> ResidualReport:
    if sys.symbolic:
        return _conditions_symbolic(sys, points, SYMBOLIC_TOL if tol is None else tol, seed, box_)
    return _conditions_fd(sys, points, FD_TOL if tol is None else tol, seed, box_)


def _conditions_symbolic(sys, points, tol, seed, box_):
    ctx = MetricContext.of_dim(sys.n)
    src = {"v": sys.v, "w": sys.w}
    res = {}
    for name, target in sys.targets.items():
        t = substitute(target, src)
        if name in _PAIRS:
            a, b = _PAIRS[name]
            lhs = grad_dot(src[a], src[b], ctx)
        else:
            lhs = box(src[name.split()[1]], ctx)
        res[name] = simplify(lhs - t)
    pts, requested, _ = _draw(sys.n, points, seed, box_, list(res.values()))
    rep = ResidualReport(requested)
    for name, e in res.items():
        f = compile_expr(e, _x_names(sys.n))
        rep.conditions[name] = _summarize([f(*x) for x in pts], requested, tol, e is ZERO)
    rep.notes.append("route: symbolic derivatives")
    return rep


def _conditions_fd(sys, points, tol, seed, box_):
    pts, requested, _ = _draw(sys.n, points, seed, box_)
    rep = ResidualReport(requested)
    sources = {"v": sys.v, "w": sys.w}
    good = _resolve_points(sources, pts, sys.n, requested, rep.notes)
    targets = {k: compile_expr(e, ["v", "w"]) for k, e in sys.targets.items()}
    sig = np.array([1.0] + [-1.0] * sys.n)
    vals = {k: [] for k in sys.targets}
    grad_err = []  # per point, worst over both sources
    for P in good:
        here = P.values_at(P.x, False)
        tv = {k: f(here["v"], here["w"]) for k, f in targets.items()}
        g = {k: P.closed_gradient(k) for k in ("v", "w")}
        for name, (a, b) in _PAIRS.items():
            if name in tv:
                vals[name].append(float(np.sum(sig * g[a] * g[b])) - tv[name])
        for k in ("v", "w"):
            name = f"box {k}"
            if name in tv:
                vals[name].append(P.fd_box(lambda d, k=k: d[k]) - tv[name])
        grad_err.append(max(float(np.max(np.abs(P.fd_gradient(k) - g[k]))) for k in ("v", "w")))
    for name, vs in vals.items():
        rep.conditions[name] = _summarize(vs, requested, tol)
    # closed-form gradient of parametric sources against differences
    rep.conditions["grad = A(p)"] = _summarize(grad_err, requested, tol)
    rep.notes.append("route: closed-form gradients, central-difference box")
    return rep


# ---------------------------------------------------------------- Q invariance


def _q_taus(q, variant, A, C):
    if q is None:
        t1, t2, _ = tau_values(A, C)
    elif isinstance(q, QOperator):
        t1, t2 = q.tau1, q.tau2
    else:
        t1, t2 = (float(t) for t in q)
        return t1, t2  # explicit taus are used as given
    a, b = TAU_VARIANTS[variant]
    return a * t1, b * t2


def check_q_invariance(f, q=None, points=64, tol: float = SYMBOLIC_TOL, variant: str = "printed",
                       seed: int = DEFAULT_SEED, box_=(-2.0, 2.0), policy="max") -> ResidualReport:
    """Qv and Qw at sampled points.

    ``f`` is a NullFamily (gradients from A(p), C(p)) or a dict {"v": expr,
    "w": expr} (symbolic gradients, ``q`` required).  ``q`` is a QOperator,
    an explicit (tau1, tau2) pair, or None to build the operator pointwise.
    """
    if isinstance(f, NullFamily):
        sources = {"v": FamilySource(f, "v", policy), "w": FamilySource(f, "w", policy)}
        n = 2
    else:
        if q is None:
            raise VerifyError("explicit sources need an operator")
        sources = {k: as_expr(e) for k, e in f.items()}
        n = 2
    pts, requested, _ = _draw(n, points, seed, box_)
    rep = ResidualReport(requested)
    good = _resolve_points(sources, pts, n, requested, rep.notes)
    qv, qw = [], []
    singular = 0
    for P in good:
        g = {k: P.closed_gradient(k) for k in sources}
        try:
            t1, t2 = _q_taus(q, variant, g.get("v"), g.get("w"))
        except SolutionError:
            singular += 1
            continue
        for k, out in (("v", qv), ("w", qw)):
            if k in g:
                out.append(g[k][0] + t1 * g[k][1] + t2 * g[k][2])
    if requested and singular / requested >= MAX_EXCLUDED:
        raise VerifyError(f"Q denominator vanishes at {singular} of {requested} points")
    if qv:
        rep.conditions["Qv"] = _summarize(qv, requested, tol)
    if qw:
        rep.conditions["Qw"] = _summarize(qw, requested, tol)
    rep.notes.append(f"tau variant: {variant}" if not isinstance(q, tuple) else "explicit taus")
    return rep


@dataclass
class QAudit:
    reports: dict  # variant -> ResidualReport

    @property
    def passing(self) -> list[str]:
        return [k for k, r in self.reports.items() if r.passed]

    @property
    def printed_passes(self) -> bool:
        return "printed" in self.passing

    @property
    def flag(self) -> bool:
        return not self.printed_passes and bool(self.passing)

    def statement(self) -> str:
        if self.printed_passes:
            return "printed tau formulas pass Qv = Qw = 0"
        if CORRECTED_VARIANT in self.passing:
            return ("printed tau formulas fail Qv = Qw = 0; corrected variant "
                    f"{CORRECTED_VARIANT} (tau2 sign reversed) passes")
        if self.passing:
            return f"printed tau formulas fail; variant(s) {', '.join(self.passing)} pass"
        return "no tau sign variant satisfies Qv = Qw = 0"


def audit_q_signs(f: NullFamily, points=64, tol: float = SYMBOLIC_TOL, seed: int = DEFAULT_SEED,
                  box_=(-2.0, 2.0)) -> QAudit:
    return QAudit({name: check_q_invariance(f, None, points, tol, name, seed, box_)
                   for name in TAU_VARIANTS})


# ---------------------------------------------------------------- families


def check_family(f: NullFamily, points=100, tol: float = 1e-9, seed: int = DEFAULT_SEED,
                 box_=(-2.0, 2.0)) -> ResidualReport:
    """Constraint residuals and null conditions at every branch of every
    sampled point.  Points where resolution fails count as excluded."""
    pts, requested, _ = _draw(2, points, seed, box_)
    rep = ResidualReport(requested)
    sig = np.array([1.0, -1.0, -1.0])
    vals = {"constraint": [], "v.v": [], "w.w": []}
    if f.shared_parameters:
        vals["w constraint (shared p)"] = []
    failed = 0
    for x in pts:
        try:
            branches = resolve_parameters(f, x)
        except SolutionError as e:
            failed += 1
            if len(rep.notes) < 5:
                rep.notes.append(f"excluded: {e}")
            continue
        worst = {k: 0.0 for k in vals}
        for b in branches:
            A, C = f.v_side.gradient(b.p), f.w_side.gradient(b.s)
            worst["constraint"] = max(worst["constraint"], b.residual)
            worst["v.v"] = max(worst["v.v"], abs(float(np.sum(sig * A * A))))
            worst["w.w"] = max(worst["w.w"], abs(float(np.sum(sig * C * C))))
            if f.shared_parameters:
                worst["w constraint (shared p)"] = max(worst["w constraint (shared p)"],
                                                        b.w_constraint_residual)
        for k in vals:
            vals[k].append(worst[k])
    if requested and failed / requested >= MAX_EXCLUDED:
        raise VerifyError(f"parameter resolution failed at {failed} of {requested} points")
    for k, vs in vals.items():
        rep.conditions[k] = _summarize(vs, requested, ROOT_TOL if k == "constraint" else tol)
    return rep
