"""Closed real intervals, axis-aligned boxes, and the transcendental
enclosures needed by the plant models.

No directed rounding is done; everything is plain double arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

HALF_PI = 0.5 * math.pi


class PoleCrossed(ArithmeticError):
    """An interval handed to ``tan_i`` contains a pole of tan."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def subset_of(self, other: "Interval", tol: float = 0.0) -> bool:
        return other.lo - tol <= self.lo and self.hi <= other.hi + tol

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        return Interval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo - other.hi, self.hi - other.lo)
        return Interval(self.lo - other, self.hi - other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Interval):
            p = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
            return Interval(min(p), max(p))
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, k: float) -> "Interval":
        a, b = self.lo * k, self.hi * k
        return Interval(min(a, b), max(a, b))

    def sqr(self) -> "Interval":
        """Tight square (the dependency-free version of ``self * self``)."""
        a, b = self.lo * self.lo, self.hi * self.hi
        if self.lo <= 0.0 <= self.hi:
            return Interval(0.0, max(a, b))
        return Interval(min(a, b), max(a, b))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


Operand = Union[Interval, float, int]


def _as_interval(x: Operand) -> Interval:
    return x if isinstance(x, Interval) else Interval(x, x)


def add(a: Operand, b: Operand) -> Interval:
    return _as_interval(a) + _as_interval(b)


def sub(a: Operand, b: Operand) -> Interval:
    return _as_interval(a) - _as_interval(b)


def mul(a: Operand, b: Operand) -> Interval:
    return _as_interval(a) * _as_interval(b)


def scale(a: Interval, k: float) -> Interval:
    return a.scale(k)


def neg(a: Interval) -> Interval:
    return -a


def _contains_point_of_lattice(a: Interval, offset: float, period: float) -> bool:
    # Is there an integer j with offset + j * period in [a.lo, a.hi]?
    j = math.ceil((a.lo - offset) / period)
    return offset + j * period <= a.hi


def sin_i(a: Interval) -> Interval:
    """Exact image of sin over ``a``."""
    if a.width >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    vals = (math.sin(a.lo), math.sin(a.hi))
    lo, hi = min(vals), max(vals)
    if _contains_point_of_lattice(a, HALF_PI, 2.0 * math.pi):
        hi = 1.0
    if _contains_point_of_lattice(a, -HALF_PI, 2.0 * math.pi):
        lo = -1.0
    return Interval(lo, hi)


def cos_i(a: Interval) -> Interval:
    """Exact image of cos over ``a``."""
    if a.width >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    vals = (math.cos(a.lo), math.cos(a.hi))
    lo, hi = min(vals), max(vals)
    if _contains_point_of_lattice(a, 0.0, 2.0 * math.pi):
        hi = 1.0
    if _contains_point_of_lattice(a, math.pi, 2.0 * math.pi):
        lo = -1.0
    return Interval(lo, hi)


def tan_i(a: Interval) -> Interval:
    """Image of tan over ``a``; raises :class:`PoleCrossed` if a pole lies in ``a``.

    tan is increasing between consecutive poles, so the endpoints give
    the exact image when no pole is inside.
    """
    if a.width >= math.pi or _contains_point_of_lattice(a, HALF_PI, math.pi):
        raise PoleCrossed(f"tan over {a!r} crosses a pole")
    return Interval(math.tan(a.lo), math.tan(a.hi))


class Box:
    """Axis-aligned hyperrectangle stored as two float arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Iterable[float], hi: Iterable[float]):
        lo = np.array(lo, dtype=float).reshape(-1)
        hi = np.array(hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("box bounds must be nonempty and of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_intervals(cls, dims: Sequence[Interval]) -> "Box":
        return cls([d.lo for d in dims], [d.hi for d in dims])

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "Box":
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def point(cls, x) -> "Box":
        x = np.asarray(x, dtype=float)
        return cls(x, x)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def dims(self) -> list[Interval]:
        return [Interval(a, b) for a, b in zip(self.lo, self.hi)]

    def __len__(self):
        return self.dim

    def __getitem__(self, i: int) -> Interval:
        return Interval(self.lo[i], self.hi[i])

    def __iter__(self):
        return iter(self.dims)

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __hash__(self):
        return hash((self.lo.tobytes(), self.hi.tobytes()))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def contains_points(self, xs, tol: float = 0.0) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.all((xs >= self.lo - tol) & (xs <= self.hi + tol), axis=1)

    def subset_of(self, other: "Box", tol: float = 0.0) -> bool:
        return bool(np.all(self.lo >= other.lo - tol) and np.all(self.hi <= other.hi + tol))

    def intersects(self, other: "Box") -> bool:
        return bool(np.all(self.lo <= other.hi) and np.all(other.lo <= self.hi))

    def hull(self, other: "Box") -> "Box":
        return Box(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def product(self, other: "Box") -> "Box":
        return Box(np.concatenate([self.lo, other.lo]), np.concatenate([self.hi, other.hi]))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def __repr__(self):
        body = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in zip(self.lo, self.hi))
        return f"Box({body})"
