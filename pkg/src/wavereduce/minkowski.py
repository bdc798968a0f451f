"""Lorentzian operators on x0..xn, signature (+, -, ..., -)."""
from __future__ import annotations

from dataclasses import dataclass

from .exprcore import Expr, VarSpace, diff, simplify
from .exprcore.nodes import num
from .exprcore.simplify import c_add, c_mul


@dataclass(frozen=True)
class MetricContext:
    space: VarSpace

    @classmethod
    def of_dim(cls, n: int) -> "MetricContext":
        return cls(VarSpace(n))

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def coordinates(self) -> tuple[str, ...]:
        return self.space.coordinates

    @property
    def signature(self) -> tuple[int, ...]:
        return (1,) + (-1,) * self.space.n


def _ctx(ctx) -> MetricContext:
    if isinstance(ctx, MetricContext):
        return ctx
    if isinstance(ctx, VarSpace):
        return MetricContext(ctx)
    return MetricContext.of_dim(int(ctx))


def box(e: Expr, ctx) -> Expr:
    """d'Alembertian: d^2/dx0^2 - sum_i d^2/dxi^2."""
    ctx = _ctx(ctx)
    terms = []
    for sign, x in zip(ctx.signature, ctx.coordinates):
        terms.append(c_mul([num(sign), diff(diff(e, x), x)]))
    return simplify(c_add(terms))


def contract(a_vec, b_vec, signature) -> Expr:
    """Minkowski contraction of two component lists."""
    terms = [c_mul([num(g), simplify(a), simplify(b)]) for g, a, b in zip(signature, a_vec, b_vec)]
    return simplify(c_add(terms))


def grad_dot(a: Expr, b: Expr, ctx) -> Expr:
    """a_mu b_mu = da/dx0 db/dx0 - sum_i da/dxi db/dxi."""
    ctx = _ctx(ctx)
    ga = [diff(a, x) for x in ctx.coordinates]
    gb = ga if b is a else [diff(b, x) for x in ctx.coordinates]
    return contract(ga, gb, ctx.signature)


def contract_numeric(a, b) -> float:
    """Minkowski contraction of two numeric vectors of any length."""
    return float(a[0] * b[0] - sum(a[i] * b[i] for i in range(1, len(a))))
