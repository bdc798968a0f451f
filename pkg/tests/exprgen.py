"""Random expression trees for property tests.

Arguments of log and sqrt, and every denominator, are kept positive so a
generated expression is defined on the whole sampling box.
"""
from __future__ import annotations

import random

from hypothesis import strategies as st

from wavereduce.exprcore import free_symbols
from wavereduce.exprcore.nodes import (
    add, cos, count_nodes, div, exp, log, mul, num, pow_, sin, sqrt, sub, sym,
)

NAMES = ("x0", "x1", "x2")


def _positive(a):
    return add(num(1), mul(a, a))


def build(choices, depth: int, names=NAMES):
    """Build a tree from a stream of integer choices (``choices()`` yields the next one)."""
    if depth <= 0 or choices(4) == 0:
        if choices(3) == 0:
            return num(choices(7) - 3)
        return sym(names[choices(len(names))])
    op = choices(10)
    a = build(choices, depth - 1, names)
    if op == 0:
        return add(a, build(choices, depth - 1, names))
    if op == 1:
        return sub(a, build(choices, depth - 1, names))
    if op == 2:
        return mul(a, build(choices, depth - 1, names))
    if op == 3:
        return div(a, _positive(build(choices, depth - 1, names)))
    if op == 4:
        return pow_(a, choices(3) + 2)
    if op == 5:
        return sin(a)
    if op == 6:
        return cos(a)
    if op == 7:
        return exp(sin(a))
    if op == 8:
        return log(_positive(a))
    return sqrt(_positive(a))


def random_expr(rng: random.Random, depth: int = 4, names=NAMES):
    return build(lambda k: rng.randrange(k), depth, names)


@st.composite
def exprs(draw, depth: int = 4, names=NAMES):
    return build(lambda k: draw(st.integers(0, k - 1)), depth, names)


def random_exprs(count: int, seed: int, depth: int = 4, min_nodes: int = 6):
    """``count`` non-trivial expressions (enough nodes and at least one symbol)."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        e = random_expr(rng, depth)
        if count_nodes(e) >= min_nodes and free_symbols(e):
            out.append(e)
    return out
