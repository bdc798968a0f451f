"""Sampled numeric checks shared by the compatibility and verification code."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprcore import DEFAULT_SEED, DomainError, Expr, compile_expr, sample_points


@dataclass(frozen=True)
class SampledMax:
    max_abs: float
    scale: float  # max |reference| over the same points
    points: int
    excluded: int

    def within(self, tol: float) -> bool:
        return self.points > 0 and self.max_abs <= tol * (1.0 + self.scale)


def sampled_max(expr: Expr, names, samples: int = 100, seed: int = DEFAULT_SEED,
                box=(-2.0, 2.0), reference: Expr | None = None, guard: float = 1e-3,
                extra_checks=()) -> SampledMax:
    """Max |expr| over sampled points, skipping singular ones."""
    names = list(names)
    checks = [expr] + ([reference] if reference is not None else []) + list(extra_checks)
    pts = sample_points(names, samples, checks, seed=seed, box=box, guard=guard,
                        max_excluded_fraction=1.0)
    f = compile_expr(expr, names)
    g = compile_expr(reference, names) if reference is not None else None
    worst = scale = 0.0
    used = 0
    for x in pts.points:
        try:
            val = abs(f(*x))
            ref = abs(g(*x)) if g is not None else 0.0
        except DomainError:
            continue
        used += 1
        worst = max(worst, val)
        scale = max(scale, ref)
    return SampledMax(worst, scale, used, samples - used)


def values_on(expr: Expr, names, points) -> np.ndarray:
    f = compile_expr(expr, list(names))
    return np.array([f(*x) for x in points], dtype=float)
