from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluate import DomainError, compile_expr
from .nodes import ExprError

DEFAULT_SEED = 20090611
DEFAULT_BOX = (-2.0, 2.0)
SINGULAR_TUBE = 1e-3


class SamplingError(ExprError):
    """Too many sampled points fell on singular loci."""


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray  # shape (accepted, dim)
    requested: int
    excluded: int

    @property
    def accepted(self) -> int:
        return len(self.points)


def sample_points(
    names,
    count: int,
    checks=(),
    seed: int = DEFAULT_SEED,
    box=DEFAULT_BOX,
    guard: float = SINGULAR_TUBE,
    max_excluded_fraction: float = 0.5,
    candidates: np.ndarray | None = None,
) -> SampleSet:
    """Draw ``count`` points uniformly in ``box`` (one (lo, hi) or one per name)
    and drop those where any expression in ``checks`` hits its singular tube.

    Pass ``candidates`` to screen an explicit point set instead.
    """
    names = list(names)
    if candidates is None:
        rng = np.random.default_rng(seed)
        lo, hi = _box_bounds(box, len(names))
        candidates = rng.uniform(lo, hi, size=(count, len(names)))
    else:
        candidates = np.asarray(candidates, dtype=float)
        count = len(candidates)
    funcs = [compile_expr(c, names, guard) for c in checks]
    keep = []
    for pt in candidates:
        try:
            for f in funcs:
                f(*pt)
        except DomainError:
            continue
        keep.append(pt)
    excluded = count - len(keep)
    if count and excluded / count >= max_excluded_fraction and excluded > 0:
        raise SamplingError(
            f"{excluded} of {count} sampled points hit singular loci "
            f"(limit {max_excluded_fraction:.0%})"
        )
    pts = np.array(keep, dtype=float).reshape(len(keep), len(names))
    return SampleSet(pts, count, excluded)


def _box_bounds(box, dim):
    arr = np.asarray(box, dtype=float)
    if arr.shape == (2,):
        return np.full(dim, arr[0]), np.full(dim, arr[1])
    if arr.shape == (dim, 2):
        return arr[:, 0], arr[:, 1]
    raise ValueError(f"box must be (lo, hi) or {dim} pairs")
