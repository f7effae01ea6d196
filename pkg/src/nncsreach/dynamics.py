"""Plant models for the two case studies.

Taxiing (nonlinear), state ``(p, theta)`` and steering ``phi``::

    p'     = p + v dt sin(theta)
    theta' = theta + (v / L) dt tan(phi)

Emergency braking (linear), state ``(d, v)`` and brake force ``u``::

    d' = d - v dt
    v' = v - (0.009 u + 0.0042) dt       (floored at 0 in the simulator)

Both hold the control for ``substeps`` dynamics updates per control period.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import StarSet
from .interval import Box, Interval, PoleCrossed, sin_i, tan_i

BRAKE_GAIN = 0.009
BRAKE_OFFSET = 0.0042

# Proportional steering law phi = -0.74 p_hat - 0.44 theta_hat, in degrees
# (p_hat in metres).  Expressed on (p_hat [m], theta_hat [rad]) -> phi [rad].
TAXI_GAIN_P_DEG = -0.74
TAXI_GAIN_THETA = -0.44


@dataclass(frozen=True)
class TaxiParams:
    v: float = 5.0
    L: float = 5.0
    dt: float = 0.05
    substeps: int = 20

    def __post_init__(self):
        if min(self.v, self.L, self.dt) <= 0 or self.substeps < 1:
            raise ValueError("taxi parameters must be positive")

    @property
    def k_p(self) -> float:
        return self.v * self.dt

    @property
    def k_theta(self) -> float:
        return self.v / self.L * self.dt


@dataclass(frozen=True)
class BrakeParams:
    dt: float = 0.05
    substeps: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.substeps < 1:
            raise ValueError("brake parameters must be positive")

    @property
    def control_hz(self) -> float:
        return 1.0 / (self.dt * self.substeps)


@dataclass(frozen=True, eq=False)
class AffineDynamics:
    """One substep ``x' = A_x x + A_u u + c``, repeated ``substeps`` times
    per control period with ``u`` held."""

    A_x: np.ndarray
    A_u: np.ndarray
    c: np.ndarray
    substeps: int = 1

    def __post_init__(self):
        A_x = np.atleast_2d(np.asarray(self.A_x, dtype=float))
        A_u = np.asarray(self.A_u, dtype=float).reshape(A_x.shape[0], -1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if A_x.shape[0] != A_x.shape[1] or c.size != A_x.shape[0]:
            raise ValueError("affine dynamics shapes disagree")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        object.__setattr__(self, "A_x", A_x)
        object.__setattr__(self, "A_u", A_u)
        object.__setattr__(self, "c", c)

    @property
    def state_dim(self) -> int:
        return self.A_x.shape[0]

    @property
    def control_dim(self) -> int:
        return self.A_u.shape[1]

    def period_map(self, substeps: int | None = None):
        """``(A, B, k)`` with ``x_next = A x + B u + k`` over a whole period."""
        n = self.substeps if substeps is None else substeps
        A = np.eye(self.state_dim)
        B = np.zeros_like(self.A_u)
        off = np.zeros(self.state_dim)
        for _ in range(n):
            A, B, off = self.A_x @ A, self.A_x @ B + self.A_u, self.A_x @ off + self.c
        return A, B, off

    def joint_matrix(self, substeps: int | None = None):
        """Period map acting on the stacked vector ``(x, u)``."""
        A, B, off = self.period_map(substeps)
        return np.hstack([A, B]), off

    def step(self, x, u) -> np.ndarray:
        """Concrete period step (rows are independent samples)."""
        A, B, off = self.period_map()
        return np.asarray(x) @ A.T + np.asarray(u) @ B.T + off


# -- taxiing ----------------------------------------------------------------

def taxi_control_matrix() -> np.ndarray:
    """Row mapping ``(p_hat, theta_hat)`` to ``phi`` in radians."""
    return np.array([[TAXI_GAIN_P_DEG * math.pi / 180.0, TAXI_GAIN_THETA]])


def taxi_step(state, phi, P: TaxiParams = TaxiParams()) -> np.ndarray:
    """Concrete taxiing step over one control period.  Accepts batches."""
    s = np.array(state, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(phi) >= math.pi / 2):
        raise PoleCrossed("steering angle at or beyond +-pi/2")
    p, th = s[..., 0], s[..., 1]
    dth = P.k_theta * np.tan(phi)
    for _ in range(P.substeps):
        p = p + P.k_p * np.sin(th)
        th = th + dth
    s[..., 0], s[..., 1] = p, th
    return s


def taxi_monotonic_step(s: Box, phi: Interval, P: TaxiParams = TaxiParams()) -> Box:
    """Interval successor of a (p, theta) box under a steering interval.

    theta' is increasing in both theta and phi, so its bounds come from
    substituting matching endpoints; p' uses the interval image of sin.
    """
    p, th = s[0], s[1]
    dth = tan_i(phi).scale(P.k_theta)
    for _ in range(P.substeps):
        p = p + sin_i(th).scale(P.k_p)
        th = Interval(th.lo + dth.lo, th.hi + dth.hi)
    return Box.from_intervals([p, th])


def remainder_bounds(theta: Interval, phi: Interval, theta_star: float, phi_star: float,
                     P: TaxiParams = TaxiParams()) -> tuple[Interval, Interval]:
    """Lagrange remainder enclosures of the first-order Taylor model.

    L1 bounds ``-(1/2) v dt sin(xi) (theta - theta*)^2`` and L2 bounds
    ``(v/L) dt tan(xi) (1 + tan(xi)^2) (phi - phi*)^2``; the 1/2 of the
    second-order term cancels against the 2 in ``d2/dphi2 tan``.
    """
    dth = (theta - theta_star).sqr()
    L1 = (-sin_i(theta) * dth).scale(0.5 * P.k_p)
    t = tan_i(phi)
    dph = (phi - phi_star).sqr()
    L2 = (t * (t.sqr() + 1.0) * dph).scale(P.k_theta)
    return L1, L2


def taxi_jacobian(theta_star: float, phi_star: float, P: TaxiParams = TaxiParams()) -> np.ndarray:
    """Jacobian of one substep on (p, theta, phi); phi is held."""
    sec2 = 1.0 + math.tan(phi_star) ** 2
    return np.array([
        [1.0, P.k_p * math.cos(theta_star), 0.0],
        [0.0, 1.0, P.k_theta * sec2],
        [0.0, 0.0, 1.0],
    ])


def taxi_linearized_step(s: StarSet, P: TaxiParams = TaxiParams(),
                         phi: Interval | None = None, theta: Interval | None = None) -> StarSet:
    """One substep of conservative linearization on a (p, theta, phi) star.

    Expands at the centre of the star's theta/phi range, applies the
    Jacobian as an affine map and adds the remainder box as new generators.
    The p coordinate enters linearly, so its expansion point cancels.
    ``phi`` and ``theta`` may pass known enclosures of the ranges the true
    states occupy; the remainder only has to hold over those.
    """
    if theta is None:
        theta = Interval(*s.coord_bounds(1))
    if phi is None:
        phi = Interval(*s.coord_bounds(2))
    tan_i(phi)  # pole check before anything else
    th_s, ph_s = theta.mid, phi.mid
    A = taxi_jacobian(th_s, ph_s, P)
    z_star = np.array([0.0, th_s, ph_s])
    f_star = np.array([P.k_p * math.sin(th_s), th_s + P.k_theta * math.tan(ph_s), ph_s])
    b = f_star - A @ z_star
    L1, L2 = remainder_bounds(theta, phi, th_s, ph_s, P)
    err = Box([L1.lo, L2.lo, 0.0], [L1.hi, L2.hi, 0.0])
    return s.affine_map(A, b).minkowski_box(err)


def taxi_linearized_period(s: StarSet, P: TaxiParams = TaxiParams(),
                           consolidate: bool = True) -> StarSet:
    """``P.substeps`` linearized substeps, re-expanding every substep.

    The steering row never changes inside a period, so its range is bounded
    once.  True headings evolve as ``theta_0 + j (v/L) dt tan(phi)``, so an
    interval enclosure of that expression bounds the true heading range at
    substep ``j`` without another LP.  With ``consolidate`` the remainder
    generators added during the period are replaced by their interval hull
    at the end.
    """
    start = s.n_latent
    phi = Interval(*s.coord_bounds(2))
    theta0 = Interval(*s.coord_bounds(1))
    dth = tan_i(phi).scale(P.k_theta)
    for j in range(P.substeps):
        theta = Interval(theta0.lo + j * dth.lo, theta0.hi + j * dth.hi)
        s = taxi_linearized_step(s, P, phi, theta)
    return s.hull_free(start) if consolidate else s


# -- braking ----------------------------------------------------------------

def brake_step(state, u, P: BrakeParams = BrakeParams()) -> np.ndarray:
    """Concrete braking step with the velocity floor.  Accepts batches."""
    s = np.array(state, dtype=float)
    u = np.asarray(u, dtype=float)
    d, v = s[..., 0], s[..., 1]
    a = BRAKE_GAIN * u + BRAKE_OFFSET
    for _ in range(P.substeps):
        d = d - v * P.dt
        v = np.maximum(v - a * P.dt, 0.0)
    s[..., 0], s[..., 1] = d, v
    return s


def brake_affine(P: BrakeParams = BrakeParams()) -> AffineDynamics:
    """Braking as affine dynamics (no velocity floor)."""
    return AffineDynamics(
        A_x=np.array([[1.0, -P.dt], [0.0, 1.0]]),
        A_u=np.array([[0.0], [-BRAKE_GAIN * P.dt]]),
        c=np.array([0.0, -BRAKE_OFFSET * P.dt]),
        substeps=P.substeps,
    )


def interval_affine_step(s: Box, u: Box, dyn: AffineDynamics) -> Box:
    """Interval enclosure of one period of affine dynamics from boxes."""
    A, B, off = dyn.period_map()
    M = np.hstack([A, B])
    lo = np.concatenate([s.lo, u.lo])
    hi = np.concatenate([s.hi, u.hi])
    mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
    c = M @ mid + off
    r = np.abs(M) @ rad
    return Box(c - r, c + r)
