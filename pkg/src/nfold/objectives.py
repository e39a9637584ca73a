"""Separable convex objectives with exact integer evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence


@dataclass(frozen=True)
class Linear:
    w: int

    def __call__(self, v: int) -> int:
        return self.w * v


@dataclass(frozen=True)
class PowerAbsDev:
    """``alpha * |v - center| ** beta``."""

    alpha: int
    beta: int
    center: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 1:
            raise ValueError("power term needs alpha >= 0 and beta >= 1")

    def __call__(self, v: int) -> int:
        return self.alpha * abs(v - self.center) ** self.beta


@dataclass(frozen=True)
class PiecewiseLinearConvex:
    """Maximum of affine pieces ``slope * v + intercept``."""

    pieces: tuple

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("piecewise-linear term needs at least one piece")

    @classmethod
    def from_breakpoints(cls, breakpoints: Sequence[int], slopes: Sequence[int],
                         value_at_first: int) -> PiecewiseLinearConvex:
        """Slopes ``s_0 <= ... <= s_k`` on the ``k + 1`` intervals cut by
        sorted breakpoints ``b_1 < ... < b_k``; the function equals
        ``value_at_first`` at ``b_1``."""
        if len(slopes) != len(breakpoints) + 1:
            raise ValueError("need one more slope than breakpoints")
        if any(a > b for a, b in zip(slopes, slopes[1:])):
            raise ValueError("slopes must be nondecreasing for convexity")
        if any(a >= b for a, b in zip(breakpoints, breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not breakpoints:
            return cls(((slopes[0], value_at_first),))
        pieces = [(slopes[0], value_at_first - slopes[0] * breakpoints[0])]
        value = value_at_first
        for i, bp in enumerate(breakpoints):
            if i:
                value += slopes[i] * (bp - breakpoints[i - 1])
            pieces.append((slopes[i + 1], value - slopes[i + 1] * bp))
        return cls(tuple(pieces))

    def __call__(self, v: int) -> int:
        return max(a * v + c for a, c in self.pieces)


@dataclass(frozen=True)
class External:
    """Caller-supplied univariate oracle; convexity is the caller's promise."""

    func: Callable[[int], int]
    name: str = "external"

    def __call__(self, v: int) -> int:
        return self.func(v)


@dataclass(frozen=True)
class Shifted:
    """``term(sign * v + offset)``; convex whenever ``term`` is."""

    term: Callable[[int], int]
    sign: int = 1
    offset: int = 0

    def __call__(self, v: int) -> int:
        return self.term(self.sign * v + self.offset)


@dataclass(frozen=True)
class SeparableObjective:
    """``f(x) = sum_j f_j(x_j)``, one univariate term per coordinate."""

    terms: tuple

    def __len__(self) -> int:
        return len(self.terms)

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != len(self.terms):
            raise ValueError(f"objective over {len(self.terms)} coordinates got {len(x)}")
        return sum(f(v) for f, v in zip(self.terms, x))

    def __add__(self, other: SeparableObjective) -> SeparableObjective:
        return SeparableObjective(self.terms + other.terms)

    @classmethod
    def linear(cls, w: Sequence[int]) -> SeparableObjective:
        return cls(tuple(Linear(int(a)) for a in w))

    @classmethod
    def zero(cls, n: int) -> SeparableObjective:
        return cls((Linear(0),) * n)

    @classmethod
    def power_distance(cls, target: Sequence[int], p: int) -> SeparableObjective:
        """``sum |x_i - target_i| ** p``."""
        return cls(tuple(PowerAbsDev(1, p, int(c)) for c in target))

    def reflected(self) -> SeparableObjective:
        """The objective ``x -> f(-x)``."""
        return SeparableObjective(tuple(Shifted(f, -1, 0) for f in self.terms))
