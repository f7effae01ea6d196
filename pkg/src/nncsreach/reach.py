"""Cell-wise reachability: per-cell successor kernels, the forward fixpoint,
transition maps with the backward fixpoint, incremental bound proving and
simulation-based estimation of unsafe cells.

A scenario couples a surrogate network (state and latent inputs), a plant,
a grid, the latent box applied at every control period, and a list of
unsafe boxes.  Three engines compute the successors of a cell:

``baseline``
    Interval bounds on the control, then a monotonic interval step of the
    plant.  State/control dependency is lost.  Defined for ``m = 1`` only.
``ibp``
    The plant is appended to the network (``m`` periods unrolled) and the
    whole thing is pushed through interval bound propagation.  Needs affine
    dynamics.
``star``
    Exact star propagation of the controller, each leaf paired with the
    state rows of its input star (they share latent columns), then the plant:
    an affine map for linear plants, conservative linearization for the
    taxiing plant.  Periods are chained on star sets with fresh latent
    generators appended each period.

Leaving the grid is handled per face.  A face touching an unsafe box is an
``unsafe`` exit and any other face is ``unverifiable``; both make the cell
count as possibly unsafe.  An ``absorbing`` face drops whatever crosses it
(used for the braking plant's ``v < 0`` side: below zero speed the vehicle
has stopped and can never close the gap again).
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import (BrakeParams, TaxiParams, brake_affine, brake_step, interval_affine_step,
                       taxi_control_matrix, taxi_linearized_period, taxi_monotonic_step)
from .geometry import StarSet, StarUnion
from .grid import CellSet, Grid, OutOfDomain, alpha
from .interval import Box, Interval, PoleCrossed
from .network import Network, append_affine, build_state_passthrough, unroll_affine_system
from .propagation import DEFAULT_SPLIT_CAP, SplitBudgetExceeded, exact_star, ibp

ENGINES = ("baseline", "ibp", "star")
FACE_POLICIES = ("unsafe", "unverifiable", "absorbing")
# region extents closer than this (in cell widths) to a domain face do not
# count as leaving it; guards against LP round-off on boundary cells
_EGRESS_TOL = 1e-9


class ConfigError(ValueError):
    """A scenario is inconsistent or asks for an unsupported combination."""


def _sink(dim: int) -> tuple[int, ...]:
    return (-1,) * dim


@dataclass(frozen=True, eq=False)
class Scenario:
    network: Network
    dynamics: TaxiParams | BrakeParams
    grid: Grid
    latent_box: Box
    unsafe: tuple[Box, ...] = ()
    engine: str = "star"
    m: int = 1
    k_max: int = 50
    absorbing: tuple[tuple[int, str], ...] = ()
    split_cap: int = DEFAULT_SPLIT_CAP
    eps_shrink: bool = False
    name: str = "scenario"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "unsafe", tuple(self.unsafe))
        object.__setattr__(self, "absorbing", tuple((int(d), str(s)) for d, s in self.absorbing))
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}; choose one of {', '.join(ENGINES)}")
        if not isinstance(self.dynamics, (TaxiParams, BrakeParams)):
            raise ConfigError("dynamics must be taxiing or braking parameters")
        if self.m < 1 or self.k_max < 1:
            raise ConfigError("m and k_max must be at least 1")
        if self.engine == "baseline" and self.m > 1:
            raise ConfigError("the baseline engine abstracts after every period; use m = 1, "
                              "or the 'star'/'ibp' engine for unrolled analysis")
        if self.engine == "ibp" and not self.is_affine:
            raise ConfigError("the 'ibp' engine needs affine dynamics; the taxiing plant is "
                              "nonlinear, use engine 'star' (or 'baseline' with m = 1)")
        n = self.grid.dim
        if self.network.in_dim != n + self.latent_box.dim:
            raise ConfigError(f"network takes {self.network.in_dim} inputs but the scenario has "
                              f"{n} states and {self.latent_box.dim} latents")
        expected = 2 if isinstance(self.dynamics, TaxiParams) else 1
        if self.network.out_dim != expected:
            raise ConfigError(f"network must output {expected} values for this plant")
        for u in self.unsafe:
            if u.dim != n:
                raise ConfigError("unsafe box dimension differs from the state dimension")
        for d, side in self.absorbing:
            if not 0 <= d < n or side not in ("lo", "hi"):
                raise ConfigError(f"bad absorbing face ({d}, {side!r})")

    # -- derived pieces -----------------------------------------------------

    @property
    def is_affine(self) -> bool:
        return isinstance(self.dynamics, BrakeParams)

    @property
    def state_dim(self) -> int:
        return self.grid.dim

    def _memo(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def controller(self) -> Network:
        """Network from ``(state, latent)`` to the plant input."""
        if isinstance(self.dynamics, TaxiParams):
            return self._memo("ctrl", lambda: append_affine(self.network, taxi_control_matrix()))
        return self.network

    @property
    def passthrough(self) -> Network:
        return self._memo("pass", lambda: build_state_passthrough(self.controller, self.state_dim))

    @property
    def affine_dynamics(self):
        if not self.is_affine:
            raise ConfigError("taxiing dynamics are not affine")
        return self._memo("aff", lambda: brake_affine(self.dynamics))

    def unrolled(self, i: int) -> Network:
        return self._memo(("unroll", i), lambda: unroll_affine_system(
            self.controller, self.affine_dynamics, m=i, latent_dims=self.latent_box.dim))

    def face_policy(self, d: int, side: str) -> str:
        if (d, side) in self.absorbing:
            return "absorbing"
        g = self.grid
        for u in self.unsafe:
            beyond = u.lo[d] <= g.bounds.lo[d] if side == "lo" else u.hi[d] >= g.bounds.hi[d]
            others = all(u.lo[j] <= g.bounds.hi[j] and u.hi[j] >= g.bounds.lo[j]
                         for j in range(g.dim) if j != d)
            if beyond and others:
                return "unsafe"
        return "unverifiable"

    def unsafe_cells(self) -> CellSet:
        return CellSet.union(self.grid.cells_in_box(u) for u in self.unsafe)

    def with_(self, **changes) -> "Scenario":
        fields = dict(network=self.network, dynamics=self.dynamics, grid=self.grid,
                      latent_box=self.latent_box, unsafe=self.unsafe, engine=self.engine,
                      m=self.m, k_max=self.k_max, absorbing=self.absorbing,
                      split_cap=self.split_cap, eps_shrink=self.eps_shrink, name=self.name)
        fields.update(changes)
        return Scenario(**fields)


# -- per-cell kernels ---------------------------------------------------------

@dataclass(frozen=True)
class CellOutcome:
    """Successors of one cell after ``1..m`` periods (index 0 is period 1)."""

    cells: tuple[CellSet, ...]
    escaped: tuple[bool, ...]     # left through an unsafe/unverifiable face, or pole crossed
    degraded: bool = False
    pole: bool = False


def _egress(region_box: Box, sc: Scenario) -> bool:
    g = sc.grid
    tol = _EGRESS_TOL * g.widths
    for d in range(g.dim):
        if region_box.lo[d] < g.bounds.lo[d] - tol[d] and sc.face_policy(d, "lo") != "absorbing":
            return True
        if region_box.hi[d] > g.bounds.hi[d] + tol[d] and sc.face_policy(d, "hi") != "absorbing":
            return True
    return False


def _abstract(region, sc: Scenario) -> tuple[CellSet, bool]:
    """Cells hit by a region (Box or StarUnion) and whether it escapes."""
    if isinstance(region, Box):
        return sc.grid.cells_in_box(region, sc.eps_shrink), _egress(region, sc)
    escaped = False
    for s in region:
        if s.is_feasible() and _egress(s.box_bounds(), sc):
            escaped = True
            break
    try:
        cells = alpha(region, sc.grid, sc.eps_shrink)
    except OutOfDomain:
        cells = CellSet()
    return cells, escaped


def _latent_product(box: Box, sc: Scenario) -> Box:
    return box.product(sc.latent_box)


def _baseline_period(box: Box, sc: Scenario) -> Box:
    u = ibp(sc.controller, _latent_product(box, sc))
    if isinstance(sc.dynamics, TaxiParams):
        return taxi_monotonic_step(box, u[0], sc.dynamics)
    return interval_affine_step(box, u, sc.affine_dynamics)


def _star_period(stars: list[StarSet], sc: Scenario) -> list[StarSet]:
    n = sc.state_dim
    res: list[StarSet] = []
    for s in stars:
        # leaves keep the input's latent columns, so pairing them with the
        # input's state rows gives the exact joint (state, control) relation
        src = s.product_box(sc.latent_box)
        state = src.project(range(n))
        for out in exact_star(sc.controller, src, sc.split_cap):
            leaf = state.stack_rows(out)
            if isinstance(sc.dynamics, TaxiParams):
                res.append(taxi_linearized_period(leaf, sc.dynamics).project(range(n)))
            else:
                J, off = sc.affine_dynamics.joint_matrix()
                res.append(leaf.affine_map(J, off))
            if len(res) > sc.split_cap:
                raise SplitBudgetExceeded(sc.split_cap)
    return res


def _regions(cell: tuple[int, ...], sc: Scenario, engine: str) -> list:
    """Concrete regions after periods ``1..m`` without intermediate abstraction."""
    box = sc.grid.cell_box(cell)
    if engine == "baseline":
        out, cur = [], box
        for _ in range(sc.m):
            cur = _baseline_period(cur, sc)
            out.append(cur)
        return out
    if engine == "ibp":
        return [ibp(sc.unrolled(i), box.product(Box.from_intervals(list(sc.latent_box) * i)))
                for i in range(1, sc.m + 1)]
    out, stars = [], [StarSet.from_box(box)]
    for _ in range(sc.m):
        stars = _star_period(stars, sc)
        out.append(StarUnion(stars))
    return out


def analyze_cell(cell: tuple[int, ...], sc: Scenario) -> CellOutcome:
    """Successor cells of one cell for every ``i`` in ``1..m``.

    A tan pole aborts the analysis of that cell; from the failing period on
    the cell is treated as reaching everywhere.  Blowing the split budget
    falls back to a box-valued chain and flags the cell as degraded.
    """
    key = ("cell", tuple(cell))
    if key in sc._cache:
        return sc._cache[key]
    degraded = False
    try:
        try:
            regions = _regions(cell, sc, sc.engine)
        except SplitBudgetExceeded:
            degraded = True
            regions = _regions(cell, sc, "ibp" if sc.is_affine else "baseline")
        abstracts = [_abstract(r, sc) for r in regions]
        out = CellOutcome(tuple(a for a, _ in abstracts), tuple(e for _, e in abstracts), degraded)
    except PoleCrossed:
        everything = sc.grid.all_cells()
        out = CellOutcome(tuple(everything for _ in range(sc.m)), tuple(True for _ in range(sc.m)),
                          degraded, pole=True)
    sc._cache[key] = out
    return out


def _worker(args):
    sc, cells = args
    return [analyze_cell(c, sc) for c in cells]


def analyze_cells(cells: Sequence[tuple[int, ...]], sc: Scenario, workers: int = 1) -> dict:
    """``analyze_cell`` over many cells, optionally on a process pool.

    Results are merged in cell order, so they do not depend on scheduling.
    """
    todo = sorted(c for c in set(map(tuple, cells)) if ("cell", c) not in sc._cache)
    if workers > 1 and len(todo) > workers:
        chunks = [todo[k::workers] for k in range(workers)]
        bare = sc.with_()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk, res in zip(chunks, pool.map(_worker, [(bare, ch) for ch in chunks])):
                for c, r in zip(chunk, res):
                    sc._cache[("cell", c)] = r
    else:
        for c in todo:
            analyze_cell(c, sc)
    return {tuple(c): sc._cache[("cell", tuple(c))] for c in cells}


def freach(cells: CellSet, i: int, sc: Scenario, workers: int = 1) -> tuple[CellSet, bool]:
    """Cells reachable after exactly ``i`` periods from any of ``cells``,
    abstracted per cell, plus whether any analysis escaped."""
    if not 1 <= i <= sc.m:
        raise ValueError(f"i must lie in 1..{sc.m}")
    res = analyze_cells(list(cells), sc, workers)
    out = CellSet.union(r.cells[i - 1] for r in res.values())
    return out, any(r.escaped[i - 1] for r in res.values())


def freach_region(cell: tuple[int, ...], i: int, sc: Scenario):
    """The concrete ``i``-period region of one cell (Box or StarUnion)."""
    return _regions(cell, sc, sc.engine)[i - 1]


# -- forward fixpoint -------------------------------------------------------

@dataclass
class ReachResult:
    per_step: list[CellSet]
    global_cells: CellSet
    converged_at: int | None
    is_safe: bool
    degraded: CellSet
    unverifiable: CellSet
    m: int = 1

    def cells_at(self, t: int) -> CellSet:
        """Cell set at period ``t``, extended periodically past convergence."""
        if t < len(self.per_step):
            return self.per_step[t]
        if self.converged_at is None:
            raise IndexError(f"analysis stopped at period {len(self.per_step) - 1}")
        k = self.converged_at
        return self.per_step[k + (t - k) % self.m]

    def to_dict(self) -> dict:
        return {
            "per_step": [s.to_list() for s in self.per_step],
            "global": self.global_cells.to_list(),
            "converged_at": self.converged_at,
            "is_safe": self.is_safe,
            "degraded": self.degraded.to_list(),
            "unverifiable": self.unverifiable.to_list(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    def to_csv(self, grid: Grid) -> str:
        rows = [(t, c) for t, s in enumerate(self.per_step) for c in s]
        return cells_csv(rows, grid, label="step")


def cells_csv(rows, grid: Grid, label: str = "tag") -> str:
    """CSV of cell rectangles; ``rows`` holds ``(tag, cell)`` pairs or bare cells."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = grid.dim
    w.writerow([label] + [f"i{d}" for d in range(n)]
               + [f"{s}{d}" for d in range(n) for s in ("lo", "hi")])
    for row in rows:
        tag, c = row if isinstance(row, tuple) and len(row) == 2 and isinstance(row[1], tuple) else ("", row)
        b = grid.cell_box(c)
        w.writerow([tag] + list(c) + [repr(float(v)) for d in range(n) for v in (b.lo[d], b.hi[d])])
    return buf.getvalue()


def forward_reach(sc: Scenario, R0: Box, workers: int = 1,
                  progress: Callable[[int, CellSet], None] | None = None) -> ReachResult:
    """Forward fixpoint over grid cells.

    From ``C_k`` the sets ``C_{k+1} .. C_{k+m}`` are obtained with the
    ``1..m``-period kernels; everything is accumulated into the global set,
    the loop continues from ``C_{k+m}`` and stops once ``C_k == C_{k+m}`` or
    ``k`` reaches ``k_max``.
    """
    g = sc.grid
    if not R0.subset_of(g.bounds, tol=1e-12):
        raise OutOfDomain("initial set must lie inside the grid")
    C_k = alpha(R0, g, sc.eps_shrink)
    per_step = [C_k]
    total = C_k
    degraded: set = set()
    unverifiable: set = set()
    k = 0
    converged_at = None
    while k < sc.k_max:
        res = analyze_cells(list(C_k), sc, workers)
        for c, r in res.items():
            if r.degraded:
                degraded.add(c)
            if any(r.escaped):
                unverifiable.add(c)
        for i in range(1, sc.m + 1):
            C_i = CellSet.union(r.cells[i - 1] for r in res.values())
            per_step.append(C_i)
            total = total | C_i
        if progress is not None:
            progress(k, total)
        nxt = per_step[-1]
        if nxt == C_k:
            converged_at = k
            break
        C_k = nxt
        k += sc.m
    safe = total.isdisjoint(sc.unsafe_cells()) and not unverifiable
    return ReachResult(per_step, total, converged_at, safe, CellSet(degraded),
                       CellSet(unverifiable), sc.m)


# -- transition maps and backward fixpoint ----------------------------------

@dataclass
class TransitionMaps:
    """``fwd[i-1][c]``: cells reachable from ``c`` after ``i`` periods; a
    virtual sink cell ``(-1, ...)`` stands for leaving the grid unsafely.
    ``bwd`` is the exact inverse relation."""

    fwd: list[dict]
    bwd: list[dict]
    sink: tuple[int, ...]
    degraded: CellSet

    def to_dict(self) -> dict:
        out = {"sink": list(self.sink), "degraded": self.degraded.to_list(), "fwd": []}
        for f in self.fwd:
            out["fwd"].append([[list(c), f[c].to_list()] for c in sorted(f)])
        return out


def build_transition_maps(sc: Scenario, workers: int = 1) -> TransitionMaps:
    cells = list(sc.grid.all_cells())
    res = analyze_cells(cells, sc, workers)
    sink = _sink(sc.grid.dim)
    fwd = []
    for i in range(sc.m):
        f = {}
        for c in cells:
            r = res[c]
            f[c] = r.cells[i] | CellSet([sink]) if r.escaped[i] else r.cells[i]
        fwd.append(f)
    bwd = []
    for f in fwd:
        inv: dict = {}
        for c, targets in f.items():
            for t in targets:
                inv.setdefault(t, set()).add(c)
        bwd.append({t: CellSet(s) for t, s in inv.items()})
    degraded = CellSet(c for c in cells if res[c].degraded)
    return TransitionMaps(fwd, bwd, sink, degraded)


def backward_reach(sc: Scenario, maps: TransitionMaps | None = None, workers: int = 1) -> CellSet:
    """Cells that may reach the unsafe set; the complement is proven safe.

    Seeds with the unsafe cells and every cell whose ``i``-period successors
    (``i < m``) touch them, then closes the set under ``m``-period
    predecessors until no new cell appears.
    """
    if maps is None:
        maps = build_transition_maps(sc, workers)
    sink = maps.sink
    bad = sc.unsafe_cells() | CellSet([sink])
    A = set(bad)
    for c in sc.grid.all_cells():
        for i in range(1, sc.m):
            if not maps.fwd[i - 1][c].isdisjoint(bad):
                A.add(c)
                break
    back = maps.bwd[sc.m - 1]
    frontier = set(A)
    while frontier:
        found: set = set()
        for c in frontier:
            found |= set(back.get(c, ()))
        frontier = found - A
        A |= found
    A.discard(sink)
    return CellSet(A)


def safe_cells(sc: Scenario, unsafe: CellSet) -> CellSet:
    return sc.grid.all_cells() - unsafe


# -- bound proving by index expansion ---------------------------------------

def prove_bounds_incremental(n: Network, input: Box, sims: int, grid: Grid,
                             seed: int = 0, bound: Callable[[Network, Box], Box] = ibp) -> Box:
    """Per-output cell index range that provably contains ``n(input)``.

    Simulations give a first guess; while the verified enclosure pokes out
    of the candidate range on some side, that side grows by one cell.
    Returns a box whose corners are integer cell indices.
    """
    if n.out_dim != grid.dim:
        raise ValueError("network outputs must match the grid dimension")
    rng = np.random.default_rng(seed)
    ys = n.eval(input.sample(rng, max(int(sims), 1)))
    lo_idx = grid.cells_of(ys.min(axis=0)[None, :])[0].copy()
    hi_idx = grid.cells_of(ys.max(axis=0)[None, :])[0].copy()
    proven = bound(n, input)
    counts = np.asarray(grid.counts)
    while True:
        lo_edge = grid.bounds.lo + lo_idx * grid.widths
        hi_edge = np.where(hi_idx == counts - 1, grid.bounds.hi, grid.bounds.lo + (hi_idx + 1) * grid.widths)
        low_bad = proven.lo < lo_edge
        high_bad = proven.hi > hi_edge
        if not (low_bad.any() or high_bad.any()):
            return Box(lo_idx.astype(float), hi_idx.astype(float))
        lo_idx = lo_idx - low_bad
        hi_idx = hi_idx + high_bad
        if np.any(lo_idx < 0) or np.any(hi_idx >= counts):
            raise OutOfDomain("proven output range extends past the grid")


# -- simulation -------------------------------------------------------------

def _plant_step(sc: Scenario, x: np.ndarray, z: np.ndarray):
    """One concrete period for a batch; returns ``(next, pole_mask)``."""
    u = sc.controller.eval(np.hstack([x, z]))
    if isinstance(sc.dynamics, TaxiParams):
        phi = u[:, 0]
        pole = np.abs(phi) >= math.pi / 2
        safe_phi = np.where(pole, 0.0, phi)
        return _taxi_batch(x, safe_phi, sc.dynamics), pole
    return brake_step(x, u[:, 0], sc.dynamics), np.zeros(len(x), dtype=bool)


def _taxi_batch(x, phi, P: TaxiParams):
    from .dynamics import taxi_step
    return taxi_step(x, phi, P)


def _in_unsafe(sc: Scenario, x: np.ndarray) -> np.ndarray:
    hit = np.zeros(len(x), dtype=bool)
    for u in sc.unsafe:
        hit |= u.contains_points(x)
    return hit


def simulate(sc: Scenario, x0: np.ndarray, periods: int, seed: int = 0):
    """Closed-loop trajectories with fresh uniform latents each period.

    Returns ``(traj, active)``: ``traj[r, t]`` is the state of run ``r`` at
    period ``t`` and ``active[r, t]`` says whether the run is still inside
    the grid and has not been absorbed (stopped) by then.  Analyses only
    vouch for active states.
    """
    rng = np.random.default_rng(seed)
    x = np.array(x0, dtype=float)
    runs, n = x.shape
    g = sc.grid
    traj = np.empty((runs, periods + 1, n))
    active = np.ones((runs, periods + 1), dtype=bool)
    traj[:, 0] = x
    alive = g.bounds.contains_points(x)
    active[:, 0] = alive
    lat = sc.latent_box
    for t in range(1, periods + 1):
        z = rng.uniform(lat.lo, lat.hi, size=(runs, lat.dim))
        x, pole = _plant_step(sc, x, z)
        traj[:, t] = x
        alive &= ~pole & g.bounds.contains_points(x)
        for d, side in sc.absorbing:
            edge = g.bounds.lo[d] if side == "lo" else g.bounds.hi[d]
            alive &= (x[:, d] > edge) if side == "lo" else (x[:, d] < edge)
        active[:, t] = alive
    return traj, active


def simulate_cells(sc: Scenario, runs_per_cell: int, horizon: int, seed: int = 0,
                   cells: Sequence[tuple[int, ...]] | None = None) -> CellSet:
    """Cells from which some simulated run reaches the unsafe set.

    Runs start uniformly inside each cell.  Leaving the grid through an
    unsafe or unverifiable face, or hitting a steering pole, also counts as
    unsafe, mirroring the analysis; crossing an absorbing face ends a run.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    g = sc.grid
    cells = list(g.all_cells()) if cells is None else [tuple(c) for c in cells]
    if not sc.unsafe or not cells:
        return CellSet()
    rng = np.random.default_rng(seed)
    lo = np.array([g.cell_box(c).lo for c in cells])
    hi = np.array([g.cell_box(c).hi for c in cells])
    owner = np.repeat(np.arange(len(cells)), runs_per_cell)
    x = rng.uniform(lo[owner], hi[owner])
    flagged = _in_unsafe(sc, x)
    alive = ~flagged
    lat = sc.latent_box
    for _ in range(horizon):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        z = rng.uniform(lat.lo, lat.hi, size=(idx.size, lat.dim))
        nxt, pole = _plant_step(sc, x[idx], z)
        x[idx] = nxt
        hit = pole | _in_unsafe(sc, nxt)
        inside = g.bounds.contains_points(nxt)
        stopped = np.zeros(idx.size, dtype=bool)
        for d in range(g.dim):
            for side in ("lo", "hi"):
                out = nxt[:, d] < g.bounds.lo[d] if side == "lo" else nxt[:, d] > g.bounds.hi[d]
                on_edge = nxt[:, d] <= g.bounds.lo[d] if side == "lo" else nxt[:, d] >= g.bounds.hi[d]
                if sc.face_policy(d, side) == "absorbing":
                    stopped |= on_edge & ~hit
                else:
                    hit |= out
        flagged[idx] |= hit
        alive[idx] &= ~hit & ~stopped & (inside | hit)
    return CellSet(cells[k] for k in np.unique(owner[flagged]))


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)
