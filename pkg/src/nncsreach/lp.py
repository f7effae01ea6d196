"""Dense bounded-variable primal simplex.

Solves ``min c.x  s.t.  A x <= b,  lo <= x <= hi`` with every ``x`` bounded.
Problems here are tiny (tens of rows/columns), so a dense tableau is used.
Entering variables are picked by largest reduced cost; after a run of
degenerate pivots the solver switches to Bland's rule, which cannot cycle.

A :class:`LinearProgram` keeps its basis between calls, so one phase-1
solve is shared by every objective optimized over the same polytope.
"""
from __future__ import annotations

import numpy as np

FEAS_TOL = 1e-9
_DUAL_TOL = 1e-10
_PIVOT_TOL = 1e-11
_BLAND_AFTER = 8

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


class LPError(RuntimeError):
    """The simplex iteration cap was hit or the problem is malformed."""


class Infeasible(ValueError):
    """Raised when optimizing over an empty polytope."""


class LinearProgram:
    def __init__(self, A, b, lo, hi, feas_tol: float = FEAS_TOL, max_iter: int | None = None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).reshape(-1)
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        n = lo.size
        if A.size == 0:
            A = np.zeros((b.size, n))
        if A.ndim != 2 or A.shape[1] != n or A.shape[0] != b.size or hi.size != n:
            raise LPError(f"inconsistent LP shapes A{A.shape} b{b.shape} lo{lo.shape} hi{hi.shape}")
        if np.any(hi < lo) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise LPError("variable bounds must be finite with lo <= hi")
        self.n = n
        self.m = m = A.shape[0]
        self.lo = lo
        self.feas_tol = feas_tol
        # scale rows so the tolerances mean roughly the same thing everywhere
        norms = np.maximum(np.abs(A).max(axis=1, initial=0.0), 1e-300) if m else np.zeros(0)
        norms = np.where(norms > 0, norms, 1.0)
        A = A / norms[:, None] if m else A
        rhs = (b / norms - A @ lo) if m else np.zeros(0)
        neg = rhs < 0
        k = int(neg.sum())
        self._n_art = k
        N = n + m + k
        T = np.zeros((m, N))
        T[:, :n] = A
        T[:, n:n + m] = np.eye(m)
        basis = np.arange(n, n + m)
        if k:
            rows = np.flatnonzero(neg)
            T[rows] *= -1.0
            T[rows, n + m + np.arange(k)] = 1.0
            basis[rows] = n + m + np.arange(k)
        self._T = T
        self._xB = np.abs(rhs)
        self._basis = basis
        self._ub = np.concatenate([hi - lo, np.full(m, np.inf), np.full(k, np.inf)])
        self._status = np.full(N, _AT_LOWER, dtype=np.int8)
        self._status[basis] = _BASIC
        self.max_iter = max_iter if max_iter is not None else 50 * (N + m) + 1000
        self.iterations = 0
        self._feasible: bool | None = None

    # -- public API -------------------------------------------------------

    def is_feasible(self) -> bool:
        if self._feasible is None:
            self._phase_one()
        return self._feasible

    def minimize(self, c) -> tuple[float, np.ndarray]:
        """Return ``(min c.x, argmin x)``; raises :class:`Infeasible` if empty."""
        if not self.is_feasible():
            raise Infeasible("polytope is empty")
        c = np.asarray(c, dtype=float).reshape(-1)
        cost = np.zeros(self._T.shape[1])
        cost[:self.n] = c
        self._iterate(cost)
        x = self._structural()
        return float(c @ x), x

    def maximize(self, c) -> tuple[float, np.ndarray]:
        c = np.asarray(c, dtype=float).reshape(-1)
        val, x = self.minimize(-c)
        return -val, x

    def point(self) -> np.ndarray:
        """Some feasible point (the current basic solution)."""
        if not self.is_feasible():
            raise Infeasible("polytope is empty")
        return self._structural()

    # -- internals --------------------------------------------------------

    def _structural(self) -> np.ndarray:
        vals = np.where(self._status == _AT_UPPER, self._ub, 0.0)
        vals[self._basis] = self._xB
        y = np.clip(vals[:self.n], 0.0, self._ub[:self.n])
        return self.lo + y

    def _phase_one(self):
        k = self._n_art
        if k == 0:
            self._feasible = True
            return
        N = self._T.shape[1]
        cost = np.zeros(N)
        cost[N - k:] = 1.0
        self._iterate(cost)
        infeas = float(self._xB[self._basis >= N - k].sum())
        self._feasible = infeas <= self.feas_tol
        # artificials are frozen at zero from now on
        self._ub[N - k:] = 0.0

    def _iterate(self, cost: np.ndarray):
        T, ub, status = self._T, self._ub, self._status
        degenerate_run = 0
        for _ in range(self.max_iter):
            self.iterations += 1
            basis = self._basis
            d = cost - cost[basis] @ T
            movable = ub > 0.0
            improve = ((status == _AT_LOWER) & (d < -_DUAL_TOL) & movable) | \
                      ((status == _AT_UPPER) & (d > _DUAL_TOL))
            cand = np.flatnonzero(improve)
            if cand.size == 0:
                return
            if degenerate_run >= _BLAND_AFTER:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if status[j] == _AT_LOWER else -1.0
            col = T[:, j]
            delta = direction * col
            xB = self._xB
            ubB = ub[basis]
            t_best = ub[j]
            r = -1
            dec = delta > _PIVOT_TOL
            if np.any(dec):
                ratios = np.full(delta.size, np.inf)
                ratios[dec] = np.maximum(xB[dec], 0.0) / delta[dec]
                inc = (delta < -_PIVOT_TOL) & np.isfinite(ubB)
                ratios[inc] = np.maximum(ubB[inc] - xB[inc], 0.0) / -delta[inc]
            else:
                inc = (delta < -_PIVOT_TOL) & np.isfinite(ubB)
                ratios = np.full(delta.size, np.inf)
                ratios[inc] = np.maximum(ubB[inc] - xB[inc], 0.0) / -delta[inc]
            if ratios.size:
                t_row = ratios.min()
                if t_row < t_best:
                    ties = np.flatnonzero(ratios <= t_row + 1e-12)
                    # Bland tie-break: smallest variable index leaves
                    r = int(ties[np.argmin(basis[ties])])
                    t_best = t_row
            if not np.isfinite(t_best):
                raise LPError("unbounded direction in a bounded LP")
            degenerate_run = degenerate_run + 1 if t_best <= 1e-12 else 0
            self._xB = xB - t_best * delta
            if r < 0:
                status[j] = _AT_UPPER if status[j] == _AT_LOWER else _AT_LOWER
                continue
            entering_val = t_best if direction > 0 else ub[j] - t_best
            leaving = basis[r]
            status[leaving] = _AT_LOWER if delta[r] > 0 else _AT_UPPER
            piv = T[r, j]
            T[r] /= piv
            others = col.copy()
            others[r] = 0.0
            T -= np.outer(others, T[r])
            basis[r] = j
            status[j] = _BASIC
            self._xB[r] = entering_val
        raise LPError(f"simplex exceeded {self.max_iter} iterations")


def solve(c, A, b, lo, hi, maximize: bool = False):
    """One-shot helper: optimum value and argmin/argmax, or ``None`` if infeasible."""
    lp = LinearProgram(A, b, lo, hi)
    if not lp.is_feasible():
        return None
    return lp.maximize(c) if maximize else lp.minimize(c)
