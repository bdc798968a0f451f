from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_REDUCED = ("y", "z", "v", "w", "vstar", "omega", "theta", "phi", "u")
DEFAULT_PARAMETERS = ("p", "p1", "p2", "s", "s1", "s2", "lam")


@dataclass(frozen=True)
class VarSpace:
    """Names an expression may use: coordinates x0..xn, reduced variables, parameters.

    ``n`` counts spatial dimensions, so there are ``n + 1`` coordinates.
    """

    n: int
    reduced: tuple[str, ...] = DEFAULT_REDUCED
    parameters: tuple[str, ...] = DEFAULT_PARAMETERS
    _all: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        coords = set(self.coordinates)
        red, par = set(self.reduced), set(self.parameters)
        if len(red) != len(self.reduced) or len(par) != len(self.parameters):
            raise ValueError("duplicate names in VarSpace")
        if coords & red or coords & par or red & par:
            raise ValueError("coordinate, reduced-variable and parameter names must be disjoint")
        object.__setattr__(self, "_all", frozenset(coords | red | par))

    @property
    def coordinates(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in range(self.n + 1))

    @property
    def names(self) -> frozenset:
        return self._all

    def __contains__(self, name: str) -> bool:
        return name in self._all

    def with_parameters(self, *names: str) -> "VarSpace":
        extra = tuple(nm for nm in names if nm not in self.parameters)
        return VarSpace(self.n, self.reduced, self.parameters + extra)
