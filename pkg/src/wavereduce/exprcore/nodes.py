"""Immutable, hash-consed expression nodes.

Every node is interned: two structurally identical trees are the same
Python object, so structural equality is identity and costs O(1).

Node kinds
----------
``num``   rational (``Fraction``) or float constant, payload in ``value``
``sym``   variable or parameter, name in ``value``
``add``   sum of ``args``
``mul``   product of ``args``
``pow``   ``args[0]`` raised to the rational exponent in ``value``
``fn``    function ``value`` applied to ``args[0]``
``sub``, ``div``, ``neg``
          binary/unary operator nodes produced by the parser; the
          simplifier rewrites them away.
"""
from __future__ import annotations

import threading
import weakref
from fractions import Fraction
from numbers import Rational

FUNCTIONS = frozenset({"sqrt", "exp", "log", "sin", "cos"})

_KINDS = frozenset({"num", "sym", "add", "mul", "pow", "fn", "sub", "div", "neg"})


class ExprError(ValueError):
    """Base class for expression construction, parsing and evaluation errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UnknownIdentifierError(ParseError):
    pass


class UnknownFunctionError(ParseError):
    pass


class Expr:
    """A node of an expression tree. Construct through the module helpers."""

    __slots__ = ("kind", "value", "args", "_simp", "_key", "_free", "__weakref__")

    kind: str
    value: object
    args: tuple

    def __setattr__(self, name, val):
        if name in ("kind", "value", "args"):
            raise AttributeError("Expr is immutable")
        object.__setattr__(self, name, val)

    # Equality is identity because of interning; the default object hash is kept.
    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __repr__(self):
        from .printer import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    def __reduce__(self):
        return (_rebuild, (self.kind, self.value, self.args))

    # Arithmetic builds canonical (simplified) expressions.
    def __add__(self, other):
        from .simplify import simplify

        return simplify(add(self, as_expr(other)))

    def __radd__(self, other):
        return as_expr(other) + self

    def __sub__(self, other):
        from .simplify import simplify

        return simplify(sub(self, as_expr(other)))

    def __rsub__(self, other):
        return as_expr(other) - self

    def __mul__(self, other):
        from .simplify import simplify

        return simplify(mul(self, as_expr(other)))

    def __rmul__(self, other):
        return as_expr(other) * self

    def __truediv__(self, other):
        from .simplify import simplify

        return simplify(div(self, as_expr(other)))

    def __rtruediv__(self, other):
        return as_expr(other) / self

    def __neg__(self):
        from .simplify import simplify

        return simplify(neg(self))

    def __pow__(self, k):
        from .simplify import simplify

        return simplify(pow_(self, k))

    @property
    def is_number(self) -> bool:
        return self.kind == "num"

    @property
    def is_zero(self) -> bool:
        return self.kind == "num" and self.value == 0

    @property
    def is_one(self) -> bool:
        return self.kind == "num" and self.value == 1


_table: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


def _make(kind: str, value, args: tuple = ()) -> Expr:
    # type tag keeps Fraction(1) and 1.0 apart (they compare and hash equal)
    key = (kind, type(value).__name__, value, args)
    node = _table.get(key)
    if node is not None:
        return node
    with _lock:
        node = _table.get(key)
        if node is None:
            node = object.__new__(Expr)
            object.__setattr__(node, "kind", kind)
            object.__setattr__(node, "value", value)
            object.__setattr__(node, "args", args)
            object.__setattr__(node, "_simp", None)
            object.__setattr__(node, "_key", None)
            object.__setattr__(node, "_free", None)
            _table[key] = node
    return node


def _rebuild(kind, value, args):
    return _make(kind, value, args)


def _to_number(v):
    if isinstance(v, bool):
        raise TypeError("bool is not a numeric constant")
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Rational):
        return Fraction(v)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            raise ExprError(f"non-finite constant {v!r}")
        exact = Fraction(v)
        if exact.denominator <= 10**6:
            return exact
        return v
    raise TypeError(f"cannot make a numeric constant from {type(v).__name__}")


def num(v) -> Expr:
    return _make("num", _to_number(v))


def sym(name: str) -> Expr:
    if not isinstance(name, str) or not name:
        raise ExprError(f"invalid symbol name {name!r}")
    return _make("sym", name)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return num(v)


def add(*terms) -> Expr:
    if len(terms) < 2:
        raise ExprError("add needs at least two operands")
    return _make("add", None, tuple(as_expr(t) for t in terms))


def mul(*factors) -> Expr:
    if len(factors) < 2:
        raise ExprError("mul needs at least two operands")
    return _make("mul", None, tuple(as_expr(f) for f in factors))


def sub(a, b) -> Expr:
    return _make("sub", None, (as_expr(a), as_expr(b)))


def div(a, b) -> Expr:
    return _make("div", None, (as_expr(a), as_expr(b)))


def neg(a) -> Expr:
    return _make("neg", None, (as_expr(a),))


def pow_(base, k) -> Expr:
    k = _to_number(k)
    if not isinstance(k, Fraction):
        raise ExprError("exponents must be rational")
    return _make("pow", k, (as_expr(base),))


def fn(name: str, arg) -> Expr:
    if name not in FUNCTIONS:
        raise UnknownFunctionError(f"unknown function {name!r}")
    return _make("fn", name, (as_expr(arg),))


def sqrt(a) -> Expr:
    return fn("sqrt", a)


def exp(a) -> Expr:
    return fn("exp", a)


def log(a) -> Expr:
    return fn("log", a)


def sin(a) -> Expr:
    return fn("sin", a)


def cos(a) -> Expr:
    return fn("cos", a)


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)


def symbols(names: str) -> tuple[Expr, ...]:
    return tuple(sym(n) for n in names.replace(",", " ").split())


def free_symbols(e: Expr) -> frozenset[str]:
    """Names of all ``sym`` nodes in ``e`` (no simplification)."""
    cached = e._free
    if cached is not None:
        return cached
    if e.kind == "sym":
        out = frozenset((e.value,))
    elif e.kind == "num":
        out = frozenset()
    else:
        out = frozenset().union(*(free_symbols(a) for a in e.args))
    object.__setattr__(e, "_free", out)
    return out


def sort_key(e: Expr) -> tuple:
    k = e._key
    if k is not None:
        return k
    kind = e.kind
    if kind == "num":
        k = (0, e.value)
    elif kind == "sym":
        k = (1, _natural(e.value))
    elif kind == "pow":
        k = sort_key(e.args[0]) + (e.value,)
    elif kind == "mul":
        k = (3, tuple(sort_key(a) for a in e.args))
    elif kind == "fn":
        k = (4, e.value, sort_key(e.args[0]))
    elif kind == "add":
        k = (5, tuple(sort_key(a) for a in e.args))
    else:
        k = (6, kind, tuple(sort_key(a) for a in e.args))
    object.__setattr__(e, "_key", k)
    return k


def _natural(name: str) -> tuple:
    # x2 sorts before x10
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1, name)


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace symbols (by name or ``sym`` node) or whole subtrees; result simplified."""
    from .simplify import simplify

    table = {}
    for k, v in mapping.items():
        key = sym(k) if isinstance(k, str) else k
        table[key] = as_expr(v)
    memo: dict = {}

    def walk(node):
        if node in table:
            return table[node]
        got = memo.get(node)
        if got is not None:
            return got
        if node.kind in ("num", "sym"):
            out = node
        else:
            new_args = tuple(walk(a) for a in node.args)
            out = node if new_args == node.args else _make(node.kind, node.value, new_args)
        memo[node] = out
        return out

    return simplify(walk(e))


def count_nodes(e: Expr) -> int:
    return 1 + sum(count_nodes(a) for a in e.args)


def walk(e: Expr):
    yield e
    for a in e.args:
        yield from walk(a)
