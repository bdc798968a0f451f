"""Text output in the input grammar; ``parse(to_text(e))`` rebuilds ``e``."""
from __future__ import annotations

from fractions import Fraction

from .nodes import Expr, num

# precedence levels
_SUM, _TERM, _FACTOR, _ATOM = 1, 2, 3, 4


def to_text(e: Expr) -> str:
    """Canonical trees print in readable form (subtraction, quotients,
    sqrt); any other tree prints operator-for-operator so that parsing the
    text gives back the same tree."""
    return _p(e, 0, e._simp is e)


def _num_text(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _wrap(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _exponent_text(k: Fraction) -> str:
    if k.denominator == 1:
        return str(k.numerator)
    return f"({k.numerator}/{k.denominator})"


def _is_negative_term(t: Expr) -> bool:
    if t.kind == "num":
        return t.value < 0
    return t.kind == "mul" and t.args[0].kind == "num" and t.args[0].value < 0


def _negate_term(t: Expr) -> Expr:
    from .nodes import _make, num

    if t.kind == "num":
        return num(-t.value)
    c = -t.args[0].value
    rest = t.args[1:]
    if c == 1:
        return rest[0] if len(rest) == 1 else _make("mul", None, rest)
    return _make("mul", None, (num(c),) + rest)


def _join_div(left: str, right: str) -> str:
    # "2/3" lexes as one rational literal, so keep integer operands apart
    if left[-1:].isdigit() and right[:1].isdigit():
        return f"{left} / {right}"
    return f"{left}/{right}"


def _p(e: Expr, outer: int, pretty: bool) -> str:
    kind = e.kind
    if kind == "num":
        v = e.value
        s = _num_text(v)
        if v < 0:
            return _wrap(s, _FACTOR, outer)
        if isinstance(v, Fraction) and v.denominator != 1:
            # a rational literal is a single number token
            return s if outer < _ATOM else f"({s})"
        return s
    if kind == "sym":
        return e.value
    if kind == "fn":
        return f"{e.value}({_p(e.args[0], 0, pretty)})"
    if not pretty:
        return _p_raw(e, outer)

    if kind == "add":
        parts = [_p(e.args[0], _SUM, True)]
        for t in e.args[1:]:
            if _is_negative_term(t):
                parts.append(" - " + _p(_negate_term(t), _TERM, True))
            else:
                parts.append(" + " + _p(t, _TERM, True))
        return _wrap("".join(parts), _SUM, outer)

    if kind == "mul":
        args = e.args
        if args[0].kind == "num" and args[0].value < 0:
            inner = _negate_term(e)
            return _wrap("-" + _p(inner, _TERM, True), _TERM, outer)
        numer, denom = [], []
        c = args[0].value if args[0].kind == "num" else None
        inverted = [_flip(a) for a in args
                    if a.kind == "pow" and a.value < 0 and not _kept_negative(a)]
        if isinstance(c, Fraction) and c.denominator != 1 and inverted and not any(
                _has_sum(d) for d in inverted):
            # 1/2 * 1/v prints as 1/(2*v)
            args = args[1:]
            if c.numerator != 1:
                numer.append(num(c.numerator))
            denom.append(num(c.denominator))
        for a in args:
            if a.kind == "pow" and a.value < 0 and not _kept_negative(a):
                denom.append(_flip(a))
            else:
                numer.append(a)
        if not numer:
            top = "1"
        else:
            top = "*".join(_p(a, _FACTOR, True) for a in numer)
        if not denom:
            return _wrap(top, _TERM, outer)
        if len(denom) == 1:
            bottom = _p(denom[0], _ATOM, True)
        elif any(_has_sum(d) for d in denom):
            # a product of sums would be expanded on re-parsing, so divide one by one
            bottom = "/".join(_p(a, _ATOM, True) for a in denom)
        else:
            bottom = "(" + "*".join(_p(a, _FACTOR, True) for a in denom) + ")"
        return _wrap(_join_div(top, bottom), _TERM, outer)

    if kind == "pow":
        base, k = e.args[0], e.value
        if k < 0 and _kept_negative(e):
            return _wrap(f"{_p(base, _ATOM, True)}^{k.numerator}", _FACTOR, outer)
        if k < 0:
            return _wrap(_join_div("1", _p(_flip(e), _ATOM, True)), _TERM, outer)
        if k == Fraction(1, 2):
            return f"sqrt({_p(base, 0, True)})"
        return _wrap(f"{_p(base, _ATOM, True)}^{_exponent_text(k)}", _FACTOR, outer)
    return _p_raw(e, outer)


def _p_raw(e: Expr, outer: int) -> str:
    kind = e.kind
    if kind in ("num", "sym", "fn"):
        return _p(e, outer, False)
    if kind == "add" or kind == "sub":
        op = " + " if kind == "add" else " - "
        parts = [_p(e.args[0], _SUM, False)] + [_p(a, _TERM, False) for a in e.args[1:]]
        return _wrap(op.join(parts), _SUM, outer)
    if kind == "mul":
        parts = [_p(e.args[0], _TERM, False)] + [_p(a, _FACTOR, False) for a in e.args[1:]]
        return _wrap("*".join(parts), _TERM, outer)
    if kind == "div":
        a, b = e.args
        return _wrap(_join_div(_p(a, _TERM, False), _p(b, _FACTOR, False)), _TERM, outer)
    if kind == "neg":
        return _wrap("-" + _p(e.args[0], _FACTOR, False), _FACTOR, outer)
    if kind == "pow":
        k = e.value
        text = f"{_p(e.args[0], _ATOM, False)}^{_exponent_text(k)}"
        return _wrap(text, _FACTOR, outer)
    raise AssertionError(kind)  # pragma: no cover


def _has_sum(d: Expr) -> bool:
    return d.kind == "add" or (d.kind == "pow" and d.args[0].kind == "add")


def _kept_negative(p: Expr) -> bool:
    # 1/(a + b)^2 would re-parse as the reciprocal of the expanded square
    k = p.value
    return p.args[0].kind == "add" and k.denominator == 1 and k < -1


def _flip(p: Expr) -> Expr:
    from .nodes import _make

    if p.value == -1:
        return p.args[0]
    return _make("pow", -p.value, p.args)
