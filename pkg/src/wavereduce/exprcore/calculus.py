from __future__ import annotations

from fractions import Fraction

from .nodes import ONE, ZERO, Expr, free_symbols, num
from .simplify import c_add, c_fn, c_mul, c_pow, simplify


def diff(e: Expr, var) -> Expr:
    """Partial derivative of ``e`` with respect to the symbol ``var`` (name or node)."""
    name = var.value if isinstance(var, Expr) else var
    return simplify(_d(simplify(e), name, {}))


def diff_n(e: Expr, var, times: int) -> Expr:
    for _ in range(times):
        e = diff(e, var)
    return e


def _d(e: Expr, x: str, memo: dict) -> Expr:
    if x not in free_symbols(e):
        return ZERO
    got = memo.get(e)
    if got is not None:
        return got
    kind = e.kind
    if kind == "sym":
        out = ONE
    elif kind == "add":
        out = c_add([_d(a, x, memo) for a in e.args])
    elif kind == "mul":
        terms = []
        args = e.args
        for i, a in enumerate(args):
            da = _d(a, x, memo)
            if not da.is_zero:
                terms.append(c_mul(list(args[:i]) + [da] + list(args[i + 1:])))
        out = c_add(terms)
    elif kind == "pow":
        base, k = e.args[0], e.value
        out = c_mul([num(k), c_pow(base, k - 1), _d(base, x, memo)])
    elif kind == "fn":
        a = e.args[0]
        da = _d(a, x, memo)
        name = e.value
        if name == "exp":
            outer = e
        elif name == "log":
            outer = c_pow(a, Fraction(-1))
        elif name == "sin":
            outer = c_fn("cos", a)
        elif name == "cos":
            outer = c_mul([num(-1), c_fn("sin", a)])
        elif name == "sqrt":
            outer = c_mul([num(Fraction(1, 2)), c_pow(a, Fraction(-1, 2))])
        else:  # pragma: no cover
            raise AssertionError(name)
        out = c_mul([outer, da])
    else:
        # operator nodes only survive when the caller skipped simplify
        out = _d(simplify(e), x, memo)
    memo[e] = out
    return out


def gradient(e: Expr, names) -> list[Expr]:
    return [diff(e, nm) for nm in names]


def depends_on(e: Expr, names) -> bool:
    """True when one of ``names`` survives in the simplified expression."""
    if isinstance(names, str):
        names = {names}
    wanted = {n.value if isinstance(n, Expr) else n for n in names}
    return bool(free_symbols(simplify(e)) & wanted)


def is_constant(e: Expr) -> bool:
    return simplify(e).kind == "num"

