"""Forward reachability for the taxiing aircraft.

Compares three analyses of the shipped scenario: interval boxes (baseline),
exact star sets over one control period, and star sets over two unrolled
periods.  Run from anywhere:  python3 demos/taxi_forward.py [--with-m2]

The two-period run takes about a minute and a half on one core, so it is
opt-in.
"""
import sys
import time

from nncsreach.cli import load_config
from nncsreach.reach import forward_reach

settings = [("baseline", 1), ("star", 1)]
if "--with-m2" in sys.argv:
    settings.append(("star", 2))

for engine, m in settings:
    rc = load_config("taxi.json", {"engine": engine, "m": m})
    t = time.time()
    res = forward_reach(rc.scenario, rc.initial)
    print(f"{engine:8s} m={m}: {len(res.global_cells):4d} reachable cells, "
          f"fixpoint at step {res.converged_at}, safe={res.is_safe}, {time.time() - t:.1f}s")

# The exact engine keeps the correlation between cross-track error and
# heading that boxes discard, so far fewer cells are touched.  Each step's
# cell set is available too:
rc = load_config("taxi.json")
res = forward_reach(rc.scenario, rc.initial)
for t in range(0, res.converged_at + 1):
    print(f"  step {t}: {len(res.cells_at(t))} cells")
