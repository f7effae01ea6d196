"""Uniform rectangular partitions of a state space and the abstraction map.

Cells are addressed by integer index tuples.  A point on an interior cell
face belongs to the higher cell; points on the upper edge of the domain
belong to the last cell.  Abstraction uses closed overlap: a region that
only touches a cell face still reports that cell.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .geometry import StarSet, StarUnion
from .interval import Box

Cell = tuple[int, ...]

# relative slack (in cell widths) absorbing round-off in index arithmetic;
# it can only add face-touching cells, never drop one
_INDEX_SLACK = 1e-9
EPS_SHRINK = 1e-12


class OutOfDomain(ValueError):
    """A point or region lies outside the grid's bounds."""


class CellSet:
    """Immutable set of cell index tuples with a canonical sorted order."""

    __slots__ = ("_cells",)

    def __init__(self, cells: Iterable[Sequence[int]] = ()):
        self._cells = frozenset(tuple(int(i) for i in c) for c in cells)

    def __len__(self):
        return len(self._cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(sorted(self._cells))

    def __contains__(self, c) -> bool:
        return tuple(c) in self._cells

    def __eq__(self, other):
        if isinstance(other, CellSet):
            return self._cells == other._cells
        return NotImplemented

    def __hash__(self):
        return hash(self._cells)

    def __or__(self, other: "CellSet") -> "CellSet":
        return CellSet._wrap(self._cells | other._cells)

    def __and__(self, other: "CellSet") -> "CellSet":
        return CellSet._wrap(self._cells & other._cells)

    def __sub__(self, other: "CellSet") -> "CellSet":
        return CellSet._wrap(self._cells - other._cells)

    def __le__(self, other: "CellSet") -> bool:
        return self._cells <= other._cells

    def __bool__(self):
        return bool(self._cells)

    def __repr__(self):
        return f"CellSet({len(self)} cells)"

    @classmethod
    def _wrap(cls, cells: frozenset) -> "CellSet":
        out = cls.__new__(cls)
        out._cells = cells
        return out

    @classmethod
    def union(cls, sets: Iterable["CellSet"]) -> "CellSet":
        acc: set = set()
        for s in sets:
            acc |= s._cells
        return cls._wrap(frozenset(acc))

    def isdisjoint(self, other: "CellSet") -> bool:
        return self._cells.isdisjoint(other._cells)

    def to_list(self) -> list[list[int]]:
        return [list(c) for c in self]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CellSet":
        return cls(json.loads(text))


@dataclass(frozen=True, eq=False)
class Grid:
    bounds: Box
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != self.bounds.dim or min(counts) < 1:
            raise ValueError("one positive cell count per dimension is required")
        if np.any(self.bounds.hi <= self.bounds.lo):
            raise ValueError("grid bounds must have positive width in every dimension")
        object.__setattr__(self, "counts", counts)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def widths(self) -> np.ndarray:
        return (self.bounds.hi - self.bounds.lo) / np.asarray(self.counts)

    @property
    def total_cells(self) -> int:
        return math.prod(self.counts)

    def all_cells(self) -> CellSet:
        return CellSet(itertools.product(*(range(c) for c in self.counts)))

    def is_valid(self, c: Sequence[int]) -> bool:
        return len(c) == self.dim and all(0 <= i < n for i, n in zip(c, self.counts))

    def cell_of(self, x) -> Cell:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim or not self.bounds.contains(x):
            raise OutOfDomain(f"point {x.tolist()} outside grid bounds")
        return tuple(int(i) for i in self.cells_of(x[None, :])[0])

    def cells_of(self, xs) -> np.ndarray:
        """Vectorized ``cell_of`` without the domain check (indices clipped)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        k = np.floor((xs - self.bounds.lo) / self.widths).astype(int)
        return np.clip(k, 0, np.asarray(self.counts) - 1)

    def cell_box(self, c: Sequence[int]) -> Box:
        if not self.is_valid(c):
            raise OutOfDomain(f"cell {tuple(c)} not in a {self.counts} grid")
        c = np.asarray(c)
        lo = self.bounds.lo + c * self.widths
        hi = self.bounds.lo + (c + 1) * self.widths
        # the last cell ends exactly on the domain edge
        last = c == np.asarray(self.counts) - 1
        hi = np.where(last, self.bounds.hi, hi)
        return Box(lo, hi)

    def index_ranges(self, region: Box, eps_shrink: bool = False):
        """Per-dimension inclusive index ranges of cells the box overlaps,
        or ``None`` when it misses the grid entirely."""
        lo, hi = region.lo, region.hi
        if eps_shrink:
            pad = EPS_SHRINK * self.widths
            lo, hi = lo + np.minimum(pad, 0.5 * (hi - lo)), hi - np.minimum(pad, 0.5 * (hi - lo))
        if np.any(hi < self.bounds.lo) or np.any(lo > self.bounds.hi):
            return None
        u_lo = (lo - self.bounds.lo) / self.widths
        u_hi = (hi - self.bounds.lo) / self.widths
        slack = 0.0 if eps_shrink else _INDEX_SLACK
        first = np.ceil(u_lo - slack).astype(int) - 1
        last = np.floor(u_hi + slack).astype(int)
        counts = np.asarray(self.counts)
        first = np.clip(first, 0, counts - 1)
        last = np.clip(last, 0, counts - 1)
        return first, last

    def cells_in_box(self, region: Box, eps_shrink: bool = False) -> CellSet:
        rng = self.index_ranges(region, eps_shrink)
        if rng is None:
            return CellSet()
        first, last = rng
        return CellSet(itertools.product(*(range(a, b + 1) for a, b in zip(first, last))))

    def to_dict(self) -> dict:
        return {"bounds": [[float(a), float(b)] for a, b in zip(self.bounds.lo, self.bounds.hi)],
                "counts": list(self.counts)}


def _shrunk(cell: Box, g: Grid) -> Box:
    pad = EPS_SHRINK * g.widths
    return Box(cell.lo + pad, cell.hi - pad)


def alpha(region: Box | StarSet | StarUnion, g: Grid, eps_shrink: bool = False) -> CellSet:
    """Cells of ``g`` that the region overlaps.

    Star regions are first enclosed in their bounding boxes and the
    candidate cells are then filtered with an exact intersection test.
    """
    if isinstance(region, Box):
        if region.dim != g.dim:
            raise ValueError("region dimension differs from grid dimension")
        if g.index_ranges(region, eps_shrink) is None:
            raise OutOfDomain("region lies entirely outside the grid")
        return g.cells_in_box(region, eps_shrink)
    stars = [region] if isinstance(region, StarSet) else list(region)
    found: set = set()
    touched = False
    for s in stars:
        if not s.is_feasible():
            continue
        bb = s.box_bounds()
        cand = g.cells_in_box(bb, eps_shrink)
        if not cand:
            continue
        touched = True
        for c in cand:
            if c in found:
                continue
            box = g.cell_box(c)
            if bb.subset_of(box) or s.intersects_box(_shrunk(box, g) if eps_shrink else box):
                found.add(c)
    if stars and not touched and not found:
        if any(s.is_feasible() for s in stars):
            raise OutOfDomain("region lies entirely outside the grid")
    return CellSet(found)
