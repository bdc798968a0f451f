"""Compatibility constructions for the elliptic, hyperbolic, parabolic and
first-order reduction systems, the single-ansatz check, and the equivalence
transformations of the canonical reduced equation.

The canonical reduced equation is stored as

    h (2 phi_vw + a phi_v + b phi_w) = F(phi)

with ``a = d_w Phi / Phi`` and ``b = d_v Psi / Psi``.  In the elliptic case
``w`` is the formal conjugate variable ``vstar``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .exprcore import (
    DEFAULT_SEED,
    ONE,
    ZERO,
    DomainError,
    Expr,
    SamplingError,
    as_expr,
    compile_expr,
    diff,
    evaluate,
    free_symbols,
    num,
    parse,
    simplify,
    substitute,
    sym,
    to_text,
)
from .exprcore.nodes import ExprError
from .exprcore.sampling import sample_points
from .numeric import sampled_max
from .reduction import CaseKind

ANNIHILATION_SAMPLES = 100
ANNIHILATION_TOL = 1e-9
SEPARABLE_SAMPLES = 64
SEPARABLE_TOL = 1e-9
FIT_SAMPLES = 16
FIT_TOL = 1e-8


class CompatError(ExprError):
    """Invalid compatibility input or a construction that is undefined."""


def _is_zero(e: Expr) -> bool:
    return simplify(e) is ZERO


def _identically_zero(e: Expr, names, seed=DEFAULT_SEED) -> bool:
    """Symbolic zero, or zero at every sampled point where it is defined."""
    if _is_zero(e):
        return True
    try:
        m = sampled_max(e, names, samples=32, seed=seed)
    except ExprError:
        return False
    return m.points > 0 and m.max_abs == 0.0


def _check_vars(e: Expr, allowed, what: str) -> Expr:
    extra = free_symbols(e) - set(allowed)
    if extra:
        raise CompatError(f"{what} may depend only on {sorted(allowed)}; found {sorted(extra)}")
    return e


def operator_power(h: Expr, var: str, e: Expr, times: int) -> Expr:
    """Apply (h d/dvar) to ``e`` ``times`` times."""
    out = simplify(e)
    for _ in range(times):
        out = simplify(h * diff(out, var))
    return out


@dataclass(frozen=True)
class AnnihilationCheck:
    """Outcome of one (h d)^{n+1} Phi = 0 test."""

    value: Expr
    symbolic: bool
    numeric_max: float
    numeric_scale: float

    @property
    def ok(self) -> bool:
        return self.symbolic or self.numeric_max <= ANNIHILATION_TOL * (1.0 + self.numeric_scale)


def _annihilation(h: Expr, var: str, target: Expr, times: int, names, seed) -> AnnihilationCheck:
    value = operator_power(h, var, target, times)
    if value is ZERO:
        return AnnihilationCheck(value, True, 0.0, 0.0)
    m = sampled_max(value, names, samples=ANNIHILATION_SAMPLES, seed=seed, reference=target)
    worst = m.max_abs if m.points else float("inf")
    return AnnihilationCheck(value, False, worst, m.scale)


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class CompatSpec:
    n: int
    kind: CaseKind
    potential: Expr | int
    f_coeffs: tuple = ()
    g_coeffs: tuple = ()
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n < 1:
            raise CompatError("n must be at least 1")
        if self.kind not in (CaseKind.ELLIPTIC, CaseKind.HYPERBOLIC, CaseKind.PARABOLIC):
            raise CompatError(f"no compatibility construction for case {self.kind.name}")
        object.__setattr__(self, "f_coeffs", tuple(as_expr(f) for f in self.f_coeffs))
        object.__setattr__(self, "g_coeffs", tuple(as_expr(g) for g in self.g_coeffs))
        if not self.f_coeffs:
            raise CompatError("coefficient list f is empty")
        if self.kind is CaseKind.PARABOLIC:
            if self.potential not in (1, -1):
                raise CompatError("parabolic potential is lambda = +1 or -1")
            for f in self.f_coeffs:
                _check_vars(f, ("v", "w"), "f_k")
            return
        pot = as_expr(self.potential)
        object.__setattr__(self, "potential", pot)
        other = self.other_var
        _check_vars(pot, ("v", other), "R")
        for f in self.f_coeffs:
            _check_vars(f, ("v",), "f_k")
        if self.kind is CaseKind.HYPERBOLIC:
            if not self.g_coeffs:
                raise CompatError("coefficient list g is empty")
            for g in self.g_coeffs:
                _check_vars(g, ("w",), "g_k")

    @property
    def other_var(self) -> str:
        return "vstar" if self.kind is CaseKind.ELLIPTIC else "w"

    @classmethod
    def from_text(cls, n: int, kind, potential, f=(), g=(), **kw) -> "CompatSpec":
        if isinstance(kind, str):
            kind = CaseKind[kind.upper()]
        if isinstance(potential, str) and kind is not CaseKind.PARABOLIC:
            potential = parse(potential)
        elif isinstance(potential, str):
            potential = int(potential)
        return cls(n, kind, potential, tuple(parse(t) if isinstance(t, str) else t for t in f),
                   tuple(parse(t) if isinstance(t, str) else t for t in g), **kw)


# ---------------------------------------------------------------- reduced equations


@dataclass(frozen=True)
class RealForm:
    """h~ (phi_ww +- phi_tt) + Omega phi_w + Theta phi_t = F in (omega, theta).

    For the hyperbolic case the coefficients are exact expressions; for the
    elliptic case (v = omega + i theta) they are evaluated numerically from
    the complex continuation of the (v, vstar) coefficients.
    """

    sign: int  # +1 elliptic, -1 hyperbolic
    parent: "CanonicalReducedPDE"
    h_tilde: Expr | None = None
    Omega: Expr | None = None
    Theta: Expr | None = None

    def coefficients_at(self, omega: float, theta: float) -> tuple[complex, complex, complex]:
        p = self.parent
        if self.sign < 0:
            b = {"omega": omega, "theta": theta}
            return (evaluate(self.h_tilde, b), evaluate(self.Omega, b), evaluate(self.Theta, b))
        z, zc = complex(omega, theta), complex(omega, -theta)
        b = {p.v: z, p.w: zc}
        h = complex(evaluate(p.h, b))
        a = complex(evaluate(p.drift_v, b))
        c = complex(evaluate(p.drift_w, b))
        return h / 2, h * (a + c) / 2, h * 1j * (c - a) / 2

    def lhs_at(self, phi: Expr, omega: float, theta: float) -> complex:
        """Left side for a test function phi(omega, theta)."""
        ht, om, th = self.coefficients_at(omega, theta)
        b = {"omega": omega, "theta": theta}
        d = lambda e: evaluate(e, b)  # noqa: E731
        p_w, p_t = diff(phi, "omega"), diff(phi, "theta")
        return ht * (d(diff(p_w, "omega")) + self.sign * d(diff(p_t, "theta"))) + om * d(p_w) + th * d(p_t)

    def text(self) -> str:
        op = "+" if self.sign > 0 else "-"
        head = f"h~*(phi_omegaomega {op} phi_thetatheta) + Omega*phi_omega + Theta*phi_theta = F(phi)"
        if self.sign < 0:
            return (f"{head}; h~ = {to_text(self.h_tilde)}; Omega = {to_text(self.Omega)}; "
                    f"Theta = {to_text(self.Theta)}")
        return f"{head}; v = omega + i*theta, vstar = omega - i*theta"


@dataclass(frozen=True)
class CanonicalReducedPDE:
    """h (2 phi_vw + drift_v phi_v + drift_w phi_w) = F, or the parabolic
    lambda phi_vv + drift_v phi_v = F when ``kind`` is parabolic."""

    kind: CaseKind
    h: Expr
    drift_v: Expr
    drift_w: Expr
    v: str = "v"
    w: str = "w"
    F: Expr | None = None  # in phi; None keeps F generic
    phi_map: tuple = (Fraction(1), Fraction(0))  # RHS = a*F((phi - b)/a) for generic F
    form: str = "mixed"

    def lhs(self, phi: Expr) -> Expr:
        """Left side applied to a test function phi(v, w)."""
        v, w = self.v, self.w
        if self.kind is CaseKind.PARABOLIC:
            return simplify(self.h * diff(diff(phi, v), v) + self.drift_v * diff(phi, v))
        inner = 2 * diff(diff(phi, v), w) + self.drift_v * diff(phi, v) + self.drift_w * diff(phi, w)
        return simplify(self.h * inner)

    def rhs_text(self) -> str:
        if self.F is not None:
            return to_text(self.F)
        a, b = self.phi_map
        if a == 1 and b == 0:
            return "F(phi)"
        return f"{_fmt(a)}*F((phi - {_fmt(b)})/{_fmt(a)})"

    def text(self) -> str:
        v, w = self.v, self.w
        if self.kind is CaseKind.PARABOLIC:
            lhs = _terms([(self.h, f"phi_{v}{v}"), (self.drift_v, f"phi_{v}")])
            return f"{lhs} = {self.rhs_text()}"
        inner = _terms([(num(2), f"phi_{v}{w}"), (self.drift_v, f"phi_{v}"), (self.drift_w, f"phi_{w}")])
        if self.h is ONE:
            return f"{inner} = {self.rhs_text()}"
        return f"{_factor(self.h)}*({inner}) = {self.rhs_text()}"

    def real_form(self) -> RealForm:
        if self.kind is CaseKind.HYPERBOLIC:
            m = {self.v: sym("omega") + sym("theta"), self.w: sym("omega") - sym("theta")}
            h = substitute(self.h, m)
            a = substitute(self.drift_v, m)
            b = substitute(self.drift_w, m)
            half = num(Fraction(1, 2))
            return RealForm(-1, self, simplify(half * h), simplify(half * h * (a + b)),
                            simplify(half * h * (a - b)))
        if self.kind is CaseKind.ELLIPTIC:
            return RealForm(1, self)
        raise CompatError("the parabolic reduced equation has no two-variable real form")


def _factor(c: Expr) -> str:
    t = to_text(c)
    return f"({t})" if c.kind == "add" or t.startswith("-") else t


def _terms(pairs) -> str:
    out = []
    for c, name in pairs:
        if c is ZERO:
            continue
        out.append(name if c is ONE else f"{_factor(c)}*{name}")
    return " + ".join(out) if out else "0"


def _fmt(x) -> str:
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    return str(x)


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class CompatResult:
    spec: CompatSpec
    h: Expr
    Phi: Expr
    Psi: Expr | None
    V: Expr
    W: Expr
    checks: dict  # name -> AnnihilationCheck
    reduced: CanonicalReducedPDE
    degenerate: bool = False

    @property
    def annihilation_ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    @property
    def compatible(self) -> bool:
        return self.annihilation_ok

    def witness(self) -> dict[str, str]:
        """Nonzero annihilation values, printed."""
        return {k: to_text(c.value) for k, c in self.checks.items() if not c.ok}

    def identity_residuals(self, samples: int = 100, seed: int | None = None) -> dict[str, float]:
        """Max |V Phi - h d Phi| (and the W counterpart) over sampled points."""
        seed = self.spec.seed if seed is None else seed
        s = self.spec
        names = ("v", s.other_var) if s.kind is not CaseKind.PARABOLIC else ("v", "w")
        out = {}
        if s.kind is CaseKind.PARABOLIC:
            lam = num(s.potential)
            e = self.V * self.Phi - lam * diff(self.Phi, "v")
            out["V"] = sampled_max(e, names, samples, seed).max_abs
            return out
        other = s.other_var
        out["V"] = sampled_max(self.V * self.Phi - self.h * diff(self.Phi, other), names, samples, seed).max_abs
        if self.Psi is not None:
            out["W"] = sampled_max(self.W * self.Psi - self.h * diff(self.Psi, "v"), names, samples, seed).max_abs
        return out


def _series(coeffs, base: Expr) -> Expr:
    return simplify(sum((c * base ** k for k, c in enumerate(coeffs)), ZERO))


def _two_variable_setup(spec: CompatSpec):
    other = spec.other_var
    names = ("v", other)
    R = spec.potential
    R_v = diff(R, "v")
    R_w = diff(R, other)
    R_vw = diff(R_v, other)
    if _identically_zero(R_vw, names, spec.seed):
        raise CompatError(f"R_v{other} is identically zero; h = 1/R_v{other} is undefined")
    h = simplify(ONE / R_vw)
    return names, R_v, R_w, h


def build_hyperbolic(spec: CompatSpec) -> CompatResult:
    if spec.kind is not CaseKind.HYPERBOLIC:
        raise CompatError("build_hyperbolic needs a hyperbolic spec")
    names, R_v, R_w, h = _two_variable_setup(spec)
    Phi = _series(spec.f_coeffs, R_v)
    Psi = _series(spec.g_coeffs, R_w)
    if _identically_zero(Phi, names, spec.seed):
        raise CompatError("Phi is identically zero; V is undefined")
    if _identically_zero(Psi, names, spec.seed):
        raise CompatError("Psi is identically zero; W is undefined")
    a = simplify(diff(Phi, "w") / Phi)
    b = simplify(diff(Psi, "v") / Psi)
    checks = {
        "(h*d_w)^(n+1) Phi": _annihilation(h, "w", Phi, spec.n + 1, names, spec.seed),
        "(h*d_v)^(n+1) Psi": _annihilation(h, "v", Psi, spec.n + 1, names, spec.seed),
    }
    red = CanonicalReducedPDE(CaseKind.HYPERBOLIC, h, a, b)
    return CompatResult(spec, h, Phi, Psi, simplify(h * a), simplify(h * b), checks, red)


def conjugate(e: Expr) -> Expr:
    """Formal conjugate for real coefficient functions: swap v and vstar."""
    return substitute(e, {"v": sym("vstar"), "vstar": sym("v")})


def build_elliptic(spec: CompatSpec) -> CompatResult:
    if spec.kind is not CaseKind.ELLIPTIC:
        raise CompatError("build_elliptic needs an elliptic spec")
    names, R_v, _, h = _two_variable_setup(spec)
    Phi = _series(spec.f_coeffs, R_v)
    if _identically_zero(Phi, names, spec.seed):
        raise CompatError("Phi is identically zero; V is undefined")
    Phi_c = conjugate(Phi)
    a = simplify(diff(Phi, "vstar") / Phi)
    b = simplify(diff(Phi_c, "v") / Phi_c)
    checks = {"(h*d_vstar)^(n+1) Phi": _annihilation(h, "vstar", Phi, spec.n + 1, names, spec.seed)}
    red = CanonicalReducedPDE(CaseKind.ELLIPTIC, h, a, b, w="vstar")
    return CompatResult(spec, h, Phi, Phi_c, simplify(h * a), simplify(h * b), checks, red)


def build_parabolic(spec: CompatSpec) -> CompatResult:
    if spec.kind is not CaseKind.PARABOLIC:
        raise CompatError("build_parabolic needs a parabolic spec")
    names = ("v", "w")
    lam = num(spec.potential)
    Phi = _series(spec.f_coeffs, sym("v"))
    if _identically_zero(Phi, names, spec.seed):
        raise CompatError("Phi is identically zero; V is undefined")
    V = simplify(lam * diff(Phi, "v") / Phi)
    checks = {"d_v^(n+1) Phi": _annihilation(ONE, "v", Phi, spec.n + 1, names, spec.seed)}
    red = CanonicalReducedPDE(CaseKind.PARABOLIC, lam, V, ZERO)
    return CompatResult(spec, lam, Phi, None, V, ZERO, checks, red, degenerate=True)


def build(spec: CompatSpec) -> CompatResult:
    return {
        CaseKind.HYPERBOLIC: build_hyperbolic,
        CaseKind.ELLIPTIC: build_elliptic,
        CaseKind.PARABOLIC: build_parabolic,
    }[spec.kind](spec)


def first_order_check(V: Expr, W: Expr) -> bool:
    """The first-order system is compatible only for V = W = 0."""
    return _is_zero(as_expr(V)) and _is_zero(as_expr(W))


# ---------------------------------------------------------------- single ansatz

# Each reading maps (N, lambda) to the constant K in F = K/(u + C).
FAMILY_TEXT = {"implemented": "F = N*lambda/(u+C)", "printed": "F = lambda/(N*(u+C))"}
READINGS = {
    "implemented": lambda N, lam: N * lam,
    "printed": lambda N, lam: Fraction(lam, N),
}


@dataclass(frozen=True)
class SingleAnsatzQuery:
    lam: int
    F: Expr
    n: int = 3
    reading: str = "implemented"

    def __post_init__(self):
        if self.lam not in (0, 1, -1):
            raise CompatError("lambda must be 0, 1 or -1")
        if self.n != 3:
            raise CompatError("the single-ansatz statement covers n = 3 only")
        if self.reading not in READINGS:
            raise CompatError(f"reading must be one of {sorted(READINGS)}")
        object.__setattr__(self, "F", as_expr(self.F))
        _check_vars(self.F, ("u",), "F")


@dataclass(frozen=True)
class FamilyMatch:
    N: int
    C: float
    residual: float
    structural: bool


@dataclass(frozen=True)
class SingleAnsatzResult:
    query: SingleAnsatzQuery
    match: FamilyMatch | None
    other_reading: str
    other_match: FamilyMatch | None

    @property
    def compatible(self) -> bool:
        return self.match is not None

    def __bool__(self) -> bool:
        return self.compatible

    @property
    def note(self) -> str:
        """How the other family reading classifies the same F."""
        o = self.other_match
        got = "no member of its family" if o is None else f"N={o.N}, C={o.C:.12e}"
        same = (self.match is None) == (o is None) and (o is None or o.N == self.match.N)
        return f"{self.other_reading} reading {FAMILY_TEXT[self.other_reading]}: {got}" + \
            ("" if same else " (readings disagree)")


def _fit_family(F: Expr, lam: int, reading: str, us: np.ndarray, Fs: np.ndarray) -> FamilyMatch | None:
    finite = np.isfinite(Fs)
    if F is ZERO or (finite.all() and np.all(Fs == 0.0)):
        return FamilyMatch(0, 0.0, 0.0, F is ZERO)
    if lam == 0 or not finite.all() or np.any(Fs == 0.0):
        return None
    for N in (1, 2, 3):
        K = float(READINGS[reading](N, lam))
        # F = K/(u+C) is linear in C after inversion: C = K/F - u.
        C = float(np.mean(K / Fs - us))
        residual = float(np.max(np.abs(Fs - K / (us + C))))
        if residual <= FIT_TOL * (1.0 + float(np.max(np.abs(Fs)))):
            Cq = Fraction(C).limit_denominator(10**6)
            model = num(Fraction(READINGS[reading](N, lam))) / (sym("u") + num(Cq))
            structural = simplify(F - model) is ZERO
            return FamilyMatch(N, float(Cq) if structural else C, residual, structural)
    return None


def check_single_ansatz(q: SingleAnsatzQuery, seed: int = DEFAULT_SEED) -> SingleAnsatzResult:
    F = simplify(q.F)
    rng = np.random.default_rng(seed)
    f = compile_expr(F, ["u"], 1e-6)
    us, Fs = [], []
    for u in rng.uniform(0.25, 4.0, size=4 * FIT_SAMPLES):
        try:
            Fs.append(float(f(u)))
        except (DomainError, ValueError, ZeroDivisionError):
            continue
        us.append(u)
        if len(us) == FIT_SAMPLES:
            break
    if len(us) < FIT_SAMPLES:
        raise CompatError("F is undefined on too many sample values of u")
    us_a, Fs_a = np.array(us), np.array(Fs)
    other = "printed" if q.reading == "implemented" else "implemented"
    return SingleAnsatzResult(q, _fit_family(F, q.lam, q.reading, us_a, Fs_a), other,
                              _fit_family(F, q.lam, other, us_a, Fs_a))


# ---------------------------------------------------------------- equivalence


@dataclass(frozen=True)
class EquivalenceParams:
    """h -> k(v) l(w) h, then optional v <-> w, then phi -> a phi + b."""

    k: Expr = ONE
    l: Expr = ONE
    swap: bool = False
    a: Fraction | float = Fraction(1)
    b: Fraction | float = Fraction(0)


def _swap_vw(e: Expr, v: str, w: str) -> Expr:
    return simplify(substitute(e, {v: sym(w), w: sym(v)}))


def apply_equivalence(red: CanonicalReducedPDE, k=ONE, l=ONE, swap: bool = False,
                      a=1, b=0, seed: int = DEFAULT_SEED) -> CanonicalReducedPDE:
    if red.kind is CaseKind.PARABOLIC:
        raise CompatError("equivalence transformations act on the two-variable reduced equation")
    if a == 0:
        raise CompatError("a must be nonzero")
    k, l = simplify(as_expr(k)), simplify(as_expr(l))
    v, w = red.v, red.w
    _check_vars(k, (v,), "k")
    _check_vars(l, (w,), "l")
    for name, fac in (("k", k), ("l", l)):
        if fac is ONE:
            continue
        try:
            m = sampled_max(ONE / fac, (v, w), samples=SEPARABLE_SAMPLES, seed=seed)
        except (SamplingError, ZeroDivisionError):
            raise CompatError(f"{name} vanishes identically") from None
        if m.excluded:
            raise CompatError(f"{name} vanishes or is singular at a sampled point")
    h = simplify(k * l * red.h)
    dv = simplify(red.drift_v / l)
    dw = simplify(red.drift_w / k)
    if swap:
        h, dv, dw = _swap_vw(h, v, w), _swap_vw(dw, v, w), _swap_vw(dv, v, w)
    a = _exact(a)
    b = _exact(b)
    F, pm = red.F, red.phi_map
    if F is not None:
        if a != 1 or b != 0:
            phi = sym("phi")
            F = simplify(num(a) * substitute(F, {"phi": (phi - num(b)) / num(a)}))
    else:
        a0, b0 = pm
        pm = (a * a0, a * b0 + b)
    return replace(red, h=h, drift_v=dv, drift_w=dw, F=F, phi_map=pm)


def apply_params(red: CanonicalReducedPDE, p: EquivalenceParams, seed: int = DEFAULT_SEED):
    return apply_equivalence(red, p.k, p.l, p.swap, p.a, p.b, seed)


def compose_params(p1: EquivalenceParams, p2: EquivalenceParams, v: str = "v", w: str = "w") -> EquivalenceParams:
    """Parameters of applying p1 then p2."""
    if p1.swap:
        k = simplify(p1.k * substitute(p2.l, {w: sym(v)}))
        l = simplify(p1.l * substitute(p2.k, {v: sym(w)}))
    else:
        k, l = simplify(p1.k * p2.k), simplify(p1.l * p2.l)
    a1, b1, a2, b2 = map(_exact, (p1.a, p1.b, p2.a, p2.b))
    return EquivalenceParams(k, l, p1.swap != p2.swap, a2 * a1, a2 * b1 + b2)


def _exact(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    f = Fraction(x).limit_denominator(10**6)
    return f if float(f) == x else float(x)


_REFERENCE_VALUES = (0, 1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 2), 3)


def detect_separable(h: Expr, v: str = "v", w: str = "w", seed: int = DEFAULT_SEED):
    """Return (k, l) with h = k(v) l(w), or None when h is not separable.

    Points where h falls inside the singular tube are excluded; the call fails
    only when that removes too many samples.
    """
    h = simplify(as_expr(h))
    _check_vars(h, (v, w), "h")
    pts = sample_points((v, w), SEPARABLE_SAMPLES, [ONE / h], seed=seed)
    h_v, h_w = diff(h, v), diff(h, w)
    mixed = simplify(h * diff(h_v, w) - h_v * h_w)  # h^2 d_v d_w log|h|
    fmix = compile_expr(simplify(mixed / (h * h)), [v, w])
    fh = compile_expr(h, [v, w])
    worst = scale = 0.0
    for x in pts.points:
        try:
            worst = max(worst, abs(fmix(*x)))
            scale = max(scale, abs(np.log(abs(fh(*x)))))
        except DomainError:
            continue
    if mixed is not ZERO and worst > SEPARABLE_TOL * (1.0 + scale):
        return None
    w0 = _reference(h, w, v, pts.points[:, 0])
    v0 = _reference(h, v, w, pts.points[:, 1])
    if w0 is None or v0 is None:
        return None
    norm = simplify(substitute(h, {v: num(v0), w: num(w0)}))
    k = simplify(substitute(h, {w: num(w0)}))
    l = simplify(substitute(h, {v: num(v0)}) / norm)
    # confirm the factorization numerically
    resid = simplify(k * l - h)
    if resid is not ZERO:
        m = sampled_max(resid, (v, w), SEPARABLE_SAMPLES, seed, reference=h)
        if not m.within(SEPARABLE_TOL):
            return None
    return k, l


def _reference(h: Expr, fix: str, free: str, samples) -> Fraction | None:
    """A value of ``fix`` at which h stays defined and nonzero along ``free``."""
    for c in _REFERENCE_VALUES:
        sl = simplify(substitute(h, {fix: num(c)}))
        if sl is ZERO:
            continue
        f = compile_expr(sl, [free], 1e-6)
        try:
            if all(f(x) != 0 for x in samples):
                return Fraction(c)
        except DomainError:
            continue
    return None
