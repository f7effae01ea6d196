"""What happens when the steering enclosure touches +-90 degrees.

A perception stub that multiplies the cross-track error by twenty drives
the steering command past the tangent pole for large offsets.  The analysis
refuses to linearize there: the cell is flagged, sent to every grid cell,
and the forward result can no longer be called safe.
"""
import math

import numpy as np

from nncsreach.dynamics import TaxiParams
from nncsreach.grid import Grid
from nncsreach.interval import Box
from nncsreach.network import Affine, Network
from nncsreach.reach import Scenario, analyze_cell, forward_reach

net = Network([Affine(np.array([[20.0, 0, 0, 0], [0, 0, 0, 0]]), np.zeros(2))], 4)
grid = Grid(Box([-11, -math.radians(30)], [11, math.radians(30)]), (32, 32))
sc = Scenario(net, TaxiParams(), grid, Box([-0.8, -0.8], [0.8, 0.8]),
              (Box([-12, -1], [-10, 1]), Box([10, -1], [12, 1])), engine="star")

for cell in [(16, 16), (24, 16)]:
    out = analyze_cell(cell, sc)
    print(f"cell {cell} p in {grid.cell_box(cell).lo[0]:.2f}..{grid.cell_box(cell).hi[0]:.2f}: "
          f"pole={out.pole}, successors={len(out.cells[0])}")

res = forward_reach(sc, grid.cell_box((24, 16)))
print(f"{len(res.unverifiable)} cells marked unverifiable, "
      f"(24, 16) among them: {(24, 16) in res.unverifiable}, safe: {res.is_safe}")
