"""Star sets: affine images of bounded latent polytopes.

A star denotes ``{center + basis @ a : C @ a <= d, lo <= a <= hi}``.  The
latent box is kept apart from ``(C, d)`` so cheap interval bounds are always
available and so latent columns that no constraint touches can be optimized
in closed form instead of through the LP.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .interval import Box
from .lp import FEAS_TOL, LinearProgram

MEMBER_TOL = 1e-8


class DimensionMismatch(ValueError):
    pass


class EmptySet(ValueError):
    """An operation that needs a nonempty star got an empty one."""


class _Polytope:
    """The latent polytope ``{a : C a <= d, lo <= a <= hi}`` with a shared,
    warm-started LP over the columns that some constraint actually touches."""

    def __init__(self, C: np.ndarray, d: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 _lp: LinearProgram | None = None, _cols: np.ndarray | None = None):
        self.C, self.d, self.lo, self.hi = C, d, lo, hi
        if _cols is None:
            _cols = np.flatnonzero(np.any(C != 0.0, axis=0)) if C.shape[0] else np.zeros(0, int)
        self.cols = _cols
        self._lp = _lp
        self._feasible: bool | None = None if C.shape[0] else True

    @property
    def lp(self) -> LinearProgram:
        if self._lp is None:
            c = self.cols
            self._lp = LinearProgram(self.C[:, c], self.d, self.lo[c], self.hi[c])
        return self._lp

    def is_feasible(self) -> bool:
        if self._feasible is None:
            self._feasible = self.lp.is_feasible()
        return self._feasible

    def extend_free(self, lo: np.ndarray, hi: np.ndarray) -> "_Polytope":
        k = lo.size
        C = np.hstack([self.C, np.zeros((self.C.shape[0], k))])
        p = _Polytope(C, self.d, np.concatenate([self.lo, lo]), np.concatenate([self.hi, hi]),
                      _lp=self._lp, _cols=self.cols)
        p._feasible = self._feasible
        return p

    def extremes(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Min and max of each ``rows[i] @ a`` over the polytope."""
        rows = np.atleast_2d(rows)
        mid = 0.5 * (self.lo + self.hi)
        rad = 0.5 * (self.hi - self.lo)
        free = np.ones(self.lo.size, dtype=bool)
        free[self.cols] = False
        base = rows[:, free] @ mid[free]
        spread = np.abs(rows[:, free]) @ rad[free]
        lo = base - spread
        hi = base + spread
        if self.cols.size:
            sub = rows[:, self.cols]
            for i in range(rows.shape[0]):
                if np.any(sub[i]):
                    lo[i] += self.lp.minimize(sub[i])[0]
                    hi[i] += self.lp.maximize(sub[i])[0]
                else:
                    # still need emptiness to be checked
                    if not self.is_feasible():
                        raise EmptySet("star is empty")
        return lo, hi


@dataclass(frozen=True, eq=False)
class StarSet:
    center: np.ndarray
    basis: np.ndarray
    C: np.ndarray
    d: np.ndarray
    lat_lo: np.ndarray
    lat_hi: np.ndarray
    _poly: _Polytope | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        V = np.asarray(self.basis, dtype=float).reshape(c.size, -1)
        p = V.shape[1]
        C = np.asarray(self.C, dtype=float).reshape(-1, p) if np.size(self.C) else np.zeros((0, p))
        d = np.asarray(self.d, dtype=float).reshape(-1)
        lo = np.asarray(self.lat_lo, dtype=float).reshape(-1)
        hi = np.asarray(self.lat_hi, dtype=float).reshape(-1)
        if C.shape[0] != d.size or lo.size != p or hi.size != p:
            raise DimensionMismatch(
                f"star shapes disagree: basis {V.shape}, C {C.shape}, d {d.shape}, latent {lo.size}")
        if np.any(lo > hi) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("latent box must be finite and nonempty")
        for name, val in (("center", c), ("basis", V), ("C", C), ("d", d), ("lat_lo", lo), ("lat_hi", hi)):
            object.__setattr__(self, name, val)
        if self._poly is None:
            object.__setattr__(self, "_poly", _Polytope(C, d, lo, hi))
        object.__setattr__(self, "_bounds", None)
        object.__setattr__(self, "_quick", None)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_box(cls, b: Box) -> "StarSet":
        n = b.dim
        return cls(b.center.copy(), np.eye(n), np.zeros((0, n)), np.zeros(0), -b.radius, b.radius.copy())

    @classmethod
    def point(cls, x) -> "StarSet":
        return cls.from_box(Box.point(x))

    def _derive(self, center, basis, poly: _Polytope | None = None, C=None, d=None,
                lo=None, hi=None) -> "StarSet":
        if poly is not None:
            return StarSet(center, basis, poly.C, poly.d, poly.lo, poly.hi, _poly=poly)
        return StarSet(center, basis, C, d, lo, hi)

    # -- basic properties -------------------------------------------------

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def n_latent(self) -> int:
        return self.lat_lo.size

    @property
    def n_constraints(self) -> int:
        return self.d.size

    @property
    def latent_box(self) -> Box:
        return Box(self.lat_lo, self.lat_hi)

    # -- set operations ---------------------------------------------------

    def affine_map(self, A, b=None) -> "StarSet":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[1] != self.dim:
            raise DimensionMismatch(f"map with {A.shape[1]} columns applied to a {self.dim}-d star")
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).reshape(-1)
        if b.size != A.shape[0]:
            raise DimensionMismatch("offset length does not match map rows")
        return self._derive(A @ self.center + b, A @ self.basis, poly=self._poly)

    def project(self, dims: Sequence[int]) -> "StarSet":
        return self._derive(self.center[list(dims)], self.basis[list(dims)], poly=self._poly)

    def add_halfspace(self, g, h: float) -> "StarSet":
        """Intersect with ``{x : g @ x <= h}``."""
        g = np.asarray(g, dtype=float).reshape(-1)
        if g.size != self.dim:
            raise DimensionMismatch("halfspace normal has wrong length")
        row = g @ self.basis
        rhs = float(h - g @ self.center)
        return self._derive(self.center, self.basis, C=np.vstack([self.C, row]),
                            d=np.append(self.d, rhs), lo=self.lat_lo, hi=self.lat_hi)

    def add_halfspaces(self, G, h) -> "StarSet":
        G = np.atleast_2d(np.asarray(G, dtype=float))
        h = np.asarray(h, dtype=float).reshape(-1)
        rows = G @ self.basis
        return self._derive(self.center, self.basis, C=np.vstack([self.C, rows]),
                            d=np.concatenate([self.d, h - G @ self.center]),
                            lo=self.lat_lo, hi=self.lat_hi)

    def minkowski_box(self, e: Box) -> "StarSet":
        """Minkowski sum with a box; every nondegenerate side becomes a fresh
        unconstrained generator."""
        if e.dim != self.dim:
            raise DimensionMismatch("error box dimension differs from star dimension")
        wide = np.flatnonzero(e.hi > e.lo)
        center = self.center + e.center
        if wide.size == 0:
            return self._derive(center, self.basis, poly=self._poly)
        gens = np.zeros((self.dim, wide.size))
        gens[wide, np.arange(wide.size)] = 1.0
        r = e.radius[wide]
        return self._derive(center, np.hstack([self.basis, gens]), poly=self._poly.extend_free(-r, r))

    def product_box(self, e: Box) -> "StarSet":
        """Cartesian product ``self x e``; new coordinates are appended."""
        k = e.dim
        wide = np.flatnonzero(e.hi > e.lo)
        center = np.concatenate([self.center, e.center])
        basis = np.zeros((self.dim + k, self.n_latent + wide.size))
        basis[:self.dim, :self.n_latent] = self.basis
        basis[self.dim + wide, self.n_latent + np.arange(wide.size)] = 1.0
        r = e.radius[wide]
        poly = self._poly.extend_free(-r, r) if wide.size else self._poly
        return self._derive(center, basis, poly=poly)

    def stack_rows(self, other: "StarSet") -> "StarSet":
        """The set ``{(x, y)}`` of paired points of two stars over one latent.

        ``self`` supplies the top rows and ``other`` the bottom rows and the
        latent polytope.  ``other`` must use the same latent columns as
        ``self`` (plus possibly extra constraints), as the leaves returned by
        exact propagation do.
        """
        if other.n_latent != self.n_latent:
            raise DimensionMismatch("paired stars must share the latent space")
        return other._derive(np.concatenate([self.center, other.center]),
                             np.vstack([self.basis, other.basis]), poly=other._poly)

    def hull_free(self, start: int = 0) -> "StarSet":
        """Replace unconstrained generators with index ``>= start`` by their
        axis-aligned interval hull (at most ``dim`` new generators).

        The result contains the original set.  Columns before ``start`` are
        kept as they are, so dependencies carried by them survive.
        """
        p = self.n_latent
        free = np.ones(p, dtype=bool)
        free[self._poly.cols] = False
        free[:start] = False
        idx = np.flatnonzero(free)
        if idx.size <= self.dim:
            return self
        keep = np.flatnonzero(~free)
        mid = 0.5 * (self.lat_lo[idx] + self.lat_hi[idx])
        rad = 0.5 * (self.lat_hi[idx] - self.lat_lo[idx])
        Vf = self.basis[:, idx]
        center = self.center + Vf @ mid
        r = np.abs(Vf) @ rad
        wide = np.flatnonzero(r > 0)
        gens = np.zeros((self.dim, wide.size))
        gens[wide, np.arange(wide.size)] = 1.0
        basis = np.hstack([self.basis[:, keep], gens])
        C = np.hstack([self.C[:, keep], np.zeros((self.C.shape[0], wide.size))])
        lo = np.concatenate([self.lat_lo[keep], -r[wide]])
        hi = np.concatenate([self.lat_hi[keep], r[wide]])
        return StarSet(center, basis, C, self.d, lo, hi)

    # -- queries ----------------------------------------------------------

    def is_feasible(self) -> bool:
        return self._poly.is_feasible()

    def quick_bounds(self) -> Box:
        """Interval enclosure from the latent box alone (ignores ``C``)."""
        if self._quick is None:
            mid = 0.5 * (self.lat_lo + self.lat_hi)
            rad = 0.5 * (self.lat_hi - self.lat_lo)
            c = self.center + self.basis @ mid
            r = np.abs(self.basis) @ rad
            object.__setattr__(self, "_quick", Box(c - r, c + r))
        return self._quick

    def coord_bounds(self, i: int) -> tuple[float, float]:
        """LP-tight range of coordinate ``i``."""
        if self._bounds is not None:
            return float(self._bounds.lo[i]), float(self._bounds.hi[i])
        if not self.is_feasible():
            raise EmptySet("star is empty")
        lo, hi = self._poly.extremes(self.basis[i:i + 1])
        return float(self.center[i] + lo[0]), float(self.center[i] + hi[0])

    def box_bounds(self) -> Box:
        """Tightest axis-aligned box around the star (one LP pair per axis)."""
        if self._bounds is None:
            if not self.is_feasible():
                raise EmptySet("box_bounds of an empty star")
            lo, hi = self._poly.extremes(self.basis)
            lo, hi = self.center + lo, self.center + hi
            # LP round-off can cross by ~1e-15 on degenerate axes
            hi = np.maximum(hi, lo)
            object.__setattr__(self, "_bounds", Box(lo, hi))
        return self._bounds

    def intersects_box(self, cell: Box) -> bool:
        if cell.dim != self.dim:
            raise DimensionMismatch("cell dimension differs from star dimension")
        if not self.quick_bounds().intersects(cell):
            return False
        if self._bounds is not None and not self._bounds.intersects(cell):
            return False
        n = self.dim
        G = np.vstack([np.eye(n), -np.eye(n)])
        h = np.concatenate([cell.hi, -cell.lo])
        return self.add_halfspaces(G, h).is_feasible()

    def contains(self, x, tol: float = MEMBER_TOL, witness=None) -> bool:
        """Membership by LP over ``a`` with ``|center + basis a - x| <= tol``.

        A latent ``witness`` that satisfies every constraint settles the
        question without an LP.
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        if witness is not None and self._is_witness(x, np.asarray(witness, dtype=float), tol):
            return True
        if not self.quick_bounds().contains(x, tol):
            return False
        n = self.dim
        G = np.vstack([np.eye(n), -np.eye(n)])
        h = np.concatenate([x + tol, -(x - tol)])
        probe = self.add_halfspaces(G, h)
        return LinearProgram(probe.C, probe.d, probe.lat_lo, probe.lat_hi,
                             feas_tol=FEAS_TOL).is_feasible()

    def _is_witness(self, x, a, tol) -> bool:
        if a.size != self.n_latent:
            return False
        if np.any(a < self.lat_lo - tol) or np.any(a > self.lat_hi + tol):
            return False
        if self.n_constraints and np.any(self.C @ a > self.d + tol):
            return False
        return bool(np.all(np.abs(self.center + self.basis @ a - x) <= tol))

    def latent_member(self, alphas: np.ndarray, tol: float = FEAS_TOL) -> np.ndarray:
        alphas = np.atleast_2d(alphas)
        ok = np.all((alphas >= self.lat_lo - tol) & (alphas <= self.lat_hi + tol), axis=1)
        if self.n_constraints:
            ok &= np.all(alphas @ self.C.T <= self.d + tol, axis=1)
        return ok

    def sample(self, rng: np.random.Generator, n: int, max_batches: int = 200):
        """Uniform samples by rejection from the latent box.

        Returns ``(alphas, points)``; may return fewer than ``n`` rows when
        the polytope is a thin sliver of its box.
        """
        got = []
        total = 0
        for _ in range(max_batches):
            a = rng.uniform(self.lat_lo, self.lat_hi, size=(max(n, 64), self.n_latent))
            a = a[self.latent_member(a, tol=0.0)]
            got.append(a)
            total += a.shape[0]
            if total >= n:
                break
        alphas = np.vstack(got)[:n] if got else np.zeros((0, self.n_latent))
        return alphas, self.points(alphas)

    def points(self, alphas: np.ndarray) -> np.ndarray:
        return np.atleast_2d(alphas) @ self.basis.T + self.center


class StarUnion:
    def __init__(self, stars: Sequence[StarSet] = ()):
        stars = list(stars)
        if stars and len({s.dim for s in stars}) != 1:
            raise DimensionMismatch("all stars of a union must share a dimension")
        self.stars = stars

    def __len__(self):
        return len(self.stars)

    def __iter__(self) -> Iterator[StarSet]:
        return iter(self.stars)

    def __getitem__(self, i):
        return self.stars[i]

    @property
    def dim(self) -> int:
        if not self.stars:
            raise EmptySet("empty union has no dimension")
        return self.stars[0].dim

    def box_bounds(self) -> Box:
        if not self.stars:
            raise EmptySet("box_bounds of an empty union")
        boxes = [s.box_bounds() for s in self.stars]
        lo = np.min([b.lo for b in boxes], axis=0)
        hi = np.max([b.hi for b in boxes], axis=0)
        return Box(lo, hi)

    def map(self, fn) -> "StarUnion":
        return StarUnion([fn(s) for s in self.stars])

    def affine_map(self, A, b=None) -> "StarUnion":
        return self.map(lambda s: s.affine_map(A, b))

    def intersects_box(self, cell: Box) -> bool:
        return any(s.intersects_box(cell) for s in self.stars)

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        return any(s.contains(x, tol) for s in self.stars)
