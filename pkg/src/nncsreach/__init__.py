"""Grid-based reachability for closed-loop systems with ReLU network controllers."""
from .interval import Box, Interval, PoleCrossed
from .geometry import StarSet, StarUnion
from .network import Network, load_network, save_network
from .propagation import SplitBudgetExceeded, exact_star, ibp
from .grid import CellSet, Grid, OutOfDomain, alpha

__version__ = "0.1.0"

__all__ = [
    "Box", "Interval", "PoleCrossed", "StarSet", "StarUnion", "Network",
    "load_network", "save_network", "SplitBudgetExceeded", "exact_star", "ibp",
    "CellSet", "Grid", "OutOfDomain", "alpha", "__version__",
]
