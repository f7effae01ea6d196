"""Backward reachability for emergency braking on two grids.

The coarse 25 x 25 grid is too blunt for this slow decelerator: every cell
overlaps itself after a period, so drift towards the obstacle can never be
ruled out and nothing is proven safe.  The fine low-speed grid shows how
unrolling several periods before abstracting recovers safe cells.
"""
from nncsreach.cli import load_config
from nncsreach.reach import analyze_cell, backward_reach, safe_cells, simulate_cells

for name in ("brake.json", "brake_fine.json"):
    base = load_config(name).scenario
    total = base.grid.total_cells
    print(f"{name}: {base.grid.counts} grid, {total} cells")
    for m in (1, 2, 3):
        sc = base.with_(m=m)
        unsafe = backward_reach(sc)
        print(f"  m={m}: {len(safe_cells(sc, unsafe))} safe cells")

# Falsification gives a lower bound on the unsafe region; it must sit inside
# every backward result.
sc = load_config("brake.json").scenario
seen = simulate_cells(sc, 100, 60, seed=0)
print(f"simulation found {len(seen)} unsafe cells on brake.json, "
      f"inside backward(m=2): {seen <= backward_reach(sc.with_(m=2))}")

# One cell, up close: the farthest, slowest cell of the fine grid.
fine = load_config("brake_fine.json").scenario
for m in (1, 2):
    out = analyze_cell((99, 0), fine.with_(m=m))
    print(f"cell (99, 0), m={m}: reaches {out.cells[-1].to_list()} after {m} period(s)")
