"""Forward-mode dual numbers, used as the independent derivative oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .evaluate import DomainError, UnboundSymbolError, _bindings
from .nodes import Expr


@dataclass(frozen=True)
class DualNumber:
    """value + derivative*eps with eps^2 = 0."""

    value: float
    derivative: float = 0.0

    def __add__(self, other):
        o = _lift(other)
        return DualNumber(self.value + o.value, self.derivative + o.derivative)

    __radd__ = __add__

    def __sub__(self, other):
        o = _lift(other)
        return DualNumber(self.value - o.value, self.derivative - o.derivative)

    def __rsub__(self, other):
        return _lift(other) - self

    def __neg__(self):
        return DualNumber(-self.value, -self.derivative)

    def __mul__(self, other):
        o = _lift(other)
        return DualNumber(
            self.value * o.value, self.value * o.derivative + self.derivative * o.value
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _lift(other)
        if o.value == 0:
            raise ZeroDivisionError("dual division by a zero real part")
        return DualNumber(
            self.value / o.value,
            (self.derivative * o.value - self.value * o.derivative) / (o.value * o.value),
        )

    def __rtruediv__(self, other):
        return _lift(other) / self

    def __pow__(self, k):
        # k is a real constant exponent
        k = float(k)
        if k == 0:
            return DualNumber(1.0, 0.0)
        return DualNumber(self.value**k, k * self.value ** (k - 1) * self.derivative)


def _lift(x) -> DualNumber:
    return x if isinstance(x, DualNumber) else DualNumber(float(x), 0.0)


def d_exp(x: DualNumber) -> DualNumber:
    ev = math.exp(x.value)
    return DualNumber(ev, ev * x.derivative)


def d_log(x: DualNumber) -> DualNumber:
    return DualNumber(math.log(x.value), x.derivative / x.value)


def d_sin(x: DualNumber) -> DualNumber:
    return DualNumber(math.sin(x.value), math.cos(x.value) * x.derivative)


def d_cos(x: DualNumber) -> DualNumber:
    return DualNumber(math.cos(x.value), -math.sin(x.value) * x.derivative)


def d_sqrt(x: DualNumber) -> DualNumber:
    r = math.sqrt(x.value)
    return DualNumber(r, x.derivative / (2.0 * r))


_FUNCS = {"exp": d_exp, "log": d_log, "sin": d_sin, "cos": d_cos, "sqrt": d_sqrt}


def dual_evaluate(e: Expr, bindings, direction: str) -> DualNumber:
    """Evaluate ``e`` over dual numbers seeded along the symbol ``direction``.

    Returns (value, partial derivative w.r.t. ``direction``). Works on any
    tree, simplified or not, by following the node structure directly.
    """
    env = _bindings(bindings)
    seeded = {k: DualNumber(float(v), 1.0 if k == direction else 0.0) for k, v in env.items()}
    if direction not in seeded:
        raise UnboundSymbolError(direction)
    return _dv(e, seeded, {})


def _dv(e: Expr, env, memo) -> DualNumber:
    got = memo.get(e)
    if got is not None:
        return got
    kind = e.kind
    if kind == "num":
        out = DualNumber(float(e.value))
    elif kind == "sym":
        try:
            out = env[e.value]
        except KeyError:
            raise UnboundSymbolError(e.value) from None
    else:
        vals = [_dv(a, env, memo) for a in e.args]
        try:
            out = _dapply(e, vals)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(e, str(exc)) from None
    memo[e] = out
    return out


def _dapply(e: Expr, vals) -> DualNumber:
    kind = e.kind
    if kind == "add":
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out
    if kind == "mul":
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out
    if kind == "sub":
        return vals[0] - vals[1]
    if kind == "neg":
        return -vals[0]
    if kind == "div":
        return vals[0] / vals[1]
    if kind == "pow":
        b, k = vals[0], e.value
        if k.denominator == 1:
            if k < 0 and b.value == 0:
                raise ZeroDivisionError("negative power of zero")
            return b ** int(k)
        if b.value <= 0:
            raise ValueError("fractional power of a non-positive number")
        return b ** float(k)
    if kind == "fn":
        return _FUNCS[e.value](vals[0])
    raise AssertionError(kind)  # pragma: no cover
