"""Set propagation through ReLU networks.

``ibp`` pushes a box through layer by layer.  ``exact_star`` computes the
exact image of a star as a union of stars by splitting on every ReLU whose
input changes sign over the set; all leaves keep the input's latent
variables, so input and output stay linked.
"""
from __future__ import annotations

import numpy as np

from .geometry import StarSet, StarUnion
from .interval import Box
from .network import Affine, Network, ReLU

DEFAULT_SPLIT_CAP = 4096


class SplitBudgetExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"exact analysis needs more than {cap} star sets")
        self.cap = cap


def ibp(n: Network, input: Box) -> Box:
    if input.dim != n.in_dim:
        raise ValueError(f"box has {input.dim} dims, network takes {n.in_dim}")
    lo, hi = input.lo.copy(), input.hi.copy()
    for layer in n.layers:
        if isinstance(layer, Affine):
            mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
            c = layer.W @ mid + layer.b
            r = np.abs(layer.W) @ rad
            lo, hi = c - r, c + r
        else:
            lo, hi = np.maximum(lo, 0.0), np.maximum(hi, 0.0)
    return Box(lo, np.maximum(hi, lo))


def _relu_layer(stars: list[StarSet], width: int, split_cap: int) -> list[StarSet]:
    for i in range(width):
        out: list[StarSet] = []
        e = np.zeros(width)
        e[i] = 1.0
        for idx, s in enumerate(stars):
            q = s.quick_bounds()
            if q.lo[i] >= 0.0:
                out.append(s)
                continue
            if q.hi[i] <= 0.0:
                out.append(_zero_coord(s, i))
                continue
            lo, hi = s.coord_bounds(i)
            if lo >= 0.0:
                out.append(s)
            elif hi <= 0.0:
                out.append(_zero_coord(s, i))
            else:
                out.append(s.add_halfspace(-e, 0.0))
                out.append(_zero_coord(s.add_halfspace(e, 0.0), i))
                if len(out) + len(stars) - idx - 1 > split_cap:
                    raise SplitBudgetExceeded(split_cap)
        stars = out
    return stars


def _zero_coord(s: StarSet, i: int) -> StarSet:
    keep = np.ones(s.dim)
    keep[i] = 0.0
    return s.affine_map(np.diag(keep))


def exact_star(n: Network, input: StarSet, split_cap: int = DEFAULT_SPLIT_CAP) -> StarUnion:
    if input.dim != n.in_dim:
        raise ValueError(f"star has {input.dim} dims, network takes {n.in_dim}")
    if not input.is_feasible():
        return StarUnion([])
    stars = [input]
    width = n.in_dim
    for layer in n.layers:
        if isinstance(layer, Affine):
            stars = [s.affine_map(layer.W, layer.b) for s in stars]
            width = layer.out_dim
        elif isinstance(layer, ReLU):
            stars = _relu_layer(stars, width, split_cap)
    return StarUnion(stars)
