import numpy as np
import pytest

from nncsreach.geometry import StarSet
from nncsreach.interval import Box
from nncsreach.network import Network, ReLU, identity_network
from nncsreach.propagation import SplitBudgetExceeded, exact_star, ibp

from conftest import leaf_oracle, random_box, random_net


def test_ibp_identity():
    b = Box([-1, 2], [0, 3])
    assert ibp(identity_network(2), b) == b


def test_ibp_single_relu():
    assert ibp(Network([ReLU()], 1), Box([-1], [1])) == Box([0], [1])


def test_ibp_contains_samples(rng):
    n = random_net(rng, [2, 8, 8, 2])
    b = random_box(rng, 2)
    out = ibp(n, b)
    assert np.all(out.contains_points(n.eval(b.sample(rng, 10_000)), tol=1e-12))


def test_exact_single_relu_interval():
    u = exact_star(Network([ReLU()], 1), StarSet.from_box(Box([-1], [1])))
    assert len(u) == 2
    assert u.box_bounds() == Box([0], [1])
    lows = sorted(s.box_bounds().hi[0] for s in u)
    assert lows[0] == 0.0        # the clipped branch collapses to {0}


def test_exact_identity_is_input():
    s = StarSet.from_box(Box([-1, 0], [1, 2]))
    u = exact_star(identity_network(2), s)
    assert len(u) == 1 and u.box_bounds() == s.box_bounds()


def test_exact_two_sided_oracle(rng):
    n = random_net(rng, [2, 4, 4, 2])
    b = random_box(rng, 2)
    u = exact_star(n, StarSet.from_box(b))
    missed, wrong = leaf_oracle(n, b, u, b.sample(rng, 10_000), tol=1e-9)
    assert missed == 0 and wrong == 0


def test_leaves_keep_input_latents(rng):
    n = random_net(rng, [3, 5, 2])
    s = StarSet.from_box(random_box(rng, 3))
    for leaf in exact_star(n, s):
        assert leaf.n_latent == s.n_latent


def test_leaf_count_bound(rng):
    for _ in range(10):
        n = random_net(rng, [2, 6, 2])
        b = random_box(rng, 2, max_width=2.0)
        pre = ibp(Network(n.layers[:1], 2), b)
        unstable = int(np.sum((pre.lo < 0) & (pre.hi > 0)))
        assert len(exact_star(n, StarSet.from_box(b))) <= 2 ** unstable


def test_exact_bounds_within_ibp(rng):
    for _ in range(20):
        n = random_net(rng, [2, 8, 8, 2])
        b = random_box(rng, 2)
        assert exact_star(n, StarSet.from_box(b)).box_bounds().subset_of(ibp(n, b), tol=1e-9)


def test_split_budget():
    n = Network([ReLU()], 3)
    with pytest.raises(SplitBudgetExceeded):
        exact_star(n, StarSet.from_box(Box([-1, -1, -1], [1, 1, 1])), split_cap=4)
    assert len(exact_star(n, StarSet.from_box(Box([-1, -1, -1], [1, 1, 1])), split_cap=8)) == 8


def test_deterministic_leaf_order(rng):
    n = random_net(rng, [2, 6, 6, 2])
    s = StarSet.from_box(random_box(rng, 2))
    a, b = exact_star(n, s), exact_star(n, s)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.center, y.center) and np.array_equal(x.C, y.C)
