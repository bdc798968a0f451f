"""Numeric evaluation.

``evaluate`` walks the tree and reports the offending subexpression on a
domain violation. ``compile_expr`` generates a Python function for hot
loops and falls back to the tree walk to build the same error.

``guard`` widens every domain check into a tube: a denominator, sqrt or
fractional-power base, or log argument within ``guard`` of zero counts as
a violation. Samplers use it to keep clear of singular loci.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction

from .nodes import ExprError, Expr, free_symbols
from .printer import to_text


class EvalError(ExprError):
    pass


class UnboundSymbolError(EvalError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound symbol {name!r}")


class DomainError(EvalError):
    def __init__(self, subexpr: Expr | None, reason: str):
        self.subexpr = subexpr
        self.reason = reason
        where = f" in {to_text(subexpr)}" if subexpr is not None else ""
        super().__init__(f"{reason}{where}")


def _bindings(b) -> dict:
    return {(k.value if isinstance(k, Expr) else k): v for k, v in b.items()}


def evaluate(e: Expr, bindings, guard: float = 0.0):
    """Evaluate to a float (or a complex number when any binding is complex)."""
    env = _bindings(bindings)
    cplx = any(isinstance(v, complex) for v in env.values())
    return _ev(e, env, guard, cplx, {})


def _ev(e: Expr, env: dict, guard: float, cplx: bool, memo: dict):
    got = memo.get(e)
    if got is not None:
        return got
    kind = e.kind
    if kind == "num":
        out = float(e.value)
    elif kind == "sym":
        try:
            out = env[e.value]
        except KeyError:
            raise UnboundSymbolError(e.value) from None
    else:
        vals = [_ev(a, env, guard, cplx, memo) for a in e.args]
        out = _apply(e, vals, guard, cplx)
    memo[e] = out
    return out


def _check_den(e, d, guard):
    if d == 0 or abs(d) <= guard:
        raise DomainError(e, "division by zero")


def _apply(e: Expr, vals, guard: float, cplx: bool):
    kind = e.kind
    try:
        if kind == "add":
            return math.fsum(vals) if not cplx else sum(vals)
        if kind == "sub":
            return vals[0] - vals[1]
        if kind == "neg":
            return -vals[0]
        if kind == "mul":
            out = 1.0
            for v in vals:
                out *= v
            return out
        if kind == "div":
            _check_den(e, vals[1], guard)
            return vals[0] / vals[1]
        if kind == "pow":
            return _pow(e, vals[0], e.value, guard, cplx)
        if kind == "fn":
            return _func(e, e.value, vals[0], guard, cplx)
    except OverflowError:
        raise DomainError(e, "overflow") from None
    raise AssertionError(kind)  # pragma: no cover


def _pow(e, b, k: Fraction, guard, cplx):
    if k < 0:
        _check_den(e, b, guard)
    if k.denominator == 1:
        return b ** int(k)
    if cplx:
        return cmath.exp(float(k) * cmath.log(b)) if b != 0 else 0.0
    if b < 0 or (guard and b <= guard):
        raise DomainError(e, "fractional power of a negative number")
    return b ** float(k)


def _func(e, name, a, guard, cplx):
    if cplx:
        if name == "log" or name == "sqrt":
            if a == 0 or abs(a) <= guard:
                raise DomainError(e, f"{name} at zero")
        return getattr(cmath, name)(a)
    if name == "sqrt":
        if a < 0 or (guard and a <= guard):
            raise DomainError(e, "sqrt of a negative number")
        return math.sqrt(a)
    if name == "log":
        if a <= 0 or a <= guard:
            raise DomainError(e, "log of a non-positive number")
        return math.log(a)
    if name == "exp":
        return math.exp(a)
    if name == "sin":
        return math.sin(a)
    if name == "cos":
        return math.cos(a)
    raise AssertionError(name)  # pragma: no cover


# -- compiled evaluation ---------------------------------------------------


class _Codegen:
    def __init__(self, argnames):
        self.lines: list[str] = []
        self.names: dict = {}
        self.argnames = {nm: f"a{i}" for i, nm in enumerate(argnames)}
        self.n = 0

    def emit(self, e: Expr) -> str:
        got = self.names.get(e)
        if got is not None:
            return got
        kind = e.kind
        if kind == "num":
            return f"({float(e.value)!r})"
        if kind == "sym":
            try:
                return self.argnames[e.value]
            except KeyError:
                raise UnboundSymbolError(e.value) from None
        args = [self.emit(a) for a in e.args]
        if kind == "add":
            rhs = " + ".join(args)
        elif kind == "sub":
            rhs = f"{args[0]} - {args[1]}"
        elif kind == "neg":
            rhs = f"-{args[0]}"
        elif kind == "mul":
            rhs = " * ".join(args)
        elif kind == "div":
            rhs = f"{args[0]} / _den({args[1]})"
        elif kind == "pow":
            k = e.value
            if k.denominator == 1:
                rhs = f"{args[0]} ** {int(k)}" if k > 0 else f"_den({args[0]}) ** {int(k)}"
            elif k > 0:
                rhs = f"_fpow({args[0]}) ** {float(k)!r}"
            else:
                rhs = f"_den(_fpow({args[0]})) ** {float(k)!r}"
        elif kind == "fn":
            rhs = f"_{e.value}({args[0]})"
        else:  # pragma: no cover
            raise AssertionError(kind)
        name = f"t{self.n}"
        self.n += 1
        self.lines.append(f"    {name} = {rhs}")
        self.names[e] = name
        return name


class _Fail(Exception):
    pass


def _make_helpers(guard: float) -> dict:
    def _den(d):
        if d == 0 or abs(d) <= guard:
            raise _Fail
        return d

    def _fpow(b):
        if b < 0 or (guard and b <= guard):
            raise _Fail
        return b

    def _sqrt(a):
        if a < 0 or (guard and a <= guard):
            raise _Fail
        return math.sqrt(a)

    def _log(a):
        if a <= 0 or a <= guard:
            raise _Fail
        return math.log(a)

    return {
        "_den": _den,
        "_fpow": _fpow,
        "_sqrt": _sqrt,
        "_log": _log,
        "_exp": math.exp,
        "_sin": math.sin,
        "_cos": math.cos,
    }


def compile_expr(e: Expr, argnames, guard: float = 0.0):
    """Return ``f(*values) -> float`` evaluating ``e`` with positional arguments."""
    argnames = list(argnames)
    missing = free_symbols(e) - set(argnames)
    if missing:
        raise UnboundSymbolError(sorted(missing)[0])
    gen = _Codegen(argnames)
    result = gen.emit(e)
    params = ", ".join(gen.argnames[nm] for nm in argnames)
    src = f"def _f({params}):\n" + "\n".join(gen.lines + [f"    return {result}"]) + "\n"
    ns = _make_helpers(guard)
    exec(compile(src, f"<expr {to_text(e)[:40]}>", "exec"), ns)
    raw = ns["_f"]

    def f(*values):
        try:
            return raw(*values)
        except (_Fail, ZeroDivisionError, ValueError, OverflowError):
            try:
                evaluate(e, dict(zip(argnames, values)), guard)
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                if isinstance(exc, DomainError):
                    raise
            raise DomainError(e, "domain violation") from None

    f.expr = e
    f.argnames = tuple(argnames)
    return f
