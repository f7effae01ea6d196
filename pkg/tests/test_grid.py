import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nncsreach.geometry import StarSet, StarUnion
from nncsreach.grid import CellSet, Grid, OutOfDomain, alpha
from nncsreach.interval import Box

from test_geometry import random_star, rotated_square

G = Grid(Box([0, -1], [4, 1]), (4, 2))


def test_grid_shape():
    np.testing.assert_array_equal(G.widths, [1, 1])
    assert G.total_cells == 8 and len(G.all_cells()) == 8


def test_cell_of_corners_and_edges():
    assert G.cell_of([0, -1]) == (0, 0)
    assert G.cell_of([4, 1]) == (3, 1)
    assert G.cell_of([1.0, 0.0]) == (1, 1)      # shared edges go to the higher cell
    with pytest.raises(OutOfDomain):
        G.cell_of([4.01, 0])


def test_cells_of_matches_cell_of():
    rng = np.random.default_rng(0)
    xs = G.bounds.sample(rng, 500)
    assert [tuple(r) for r in G.cells_of(xs)] == [G.cell_of(x) for x in xs]


def test_cell_box_roundtrip_and_cover():
    for c in G.all_cells():
        assert G.cell_of(G.cell_box(c).center) == c
    vol = sum(np.prod(G.cell_box(c).hi - G.cell_box(c).lo) for c in G.all_cells())
    assert vol == pytest.approx(np.prod(G.bounds.hi - G.bounds.lo))
    assert G.cell_box((3, 1)).hi.tolist() == [4, 1]
    a, b = G.cell_box((1, 0)), G.cell_box((2, 0))
    assert a.hi[0] == b.lo[0]


def test_alpha_single_cell_box():
    box = G.cell_box((1, 0))
    closed = alpha(box, G)
    assert (1, 0) in closed
    assert closed == CellSet([(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)])
    assert alpha(box, G, eps_shrink=True) == CellSet([(1, 0)])


def test_alpha_one_and_a_half_cells():
    g = Grid(Box([0], [4]), (4,))
    assert alpha(Box([0.25], [1.75]), g) == CellSet([(0,), (1,)])


def test_alpha_outside_domain():
    with pytest.raises(OutOfDomain):
        alpha(Box([5, 5], [6, 6]), G)
    # partially outside boxes are clipped
    assert alpha(Box([3.5, 0.5], [9, 9]), G) == CellSet([(3, 1)])


def test_alpha_rotated_square_drops_corners():
    g = Grid(Box([-1.5, -1.5], [1.5, 1.5]), (3, 3))
    s = rotated_square(0.9)
    assert len(alpha(s.box_bounds(), g)) == 9
    cells = alpha(s, g)
    assert cells == CellSet([(1, 1), (0, 1), (2, 1), (1, 0), (1, 2)])
    _, xs = s.sample(np.random.default_rng(1), 20_000)
    assert CellSet(map(tuple, g.cells_of(xs))) == cells


def test_alpha_star_sound_and_within_box_abstraction():
    rng = np.random.default_rng(3)
    g = Grid(Box([-4, -4], [4, 4]), (16, 16))
    for _ in range(30):
        s = random_star(rng)
        u = StarUnion([s, random_star(rng)])
        cells = alpha(u, g)
        assert cells <= alpha(u.box_bounds(), g)
        for star in u:
            _, xs = star.sample(rng, 1000)
            xs = xs[g.bounds.contains_points(xs)]
            assert CellSet(map(tuple, g.cells_of(xs))) <= cells


@settings(max_examples=150, deadline=None)
@given(st.floats(-1, 5), st.floats(-2, 2), st.floats(0, 3), st.floats(0, 2))
def test_alpha_box_covers_its_points(x, y, w, h):
    box = Box([x, y], [x + w, y + h])
    if not box.intersects(G.bounds):
        return
    cells = alpha(box, G)
    rng = np.random.default_rng(0)
    pts = box.sample(rng, 200)
    pts = pts[G.bounds.contains_points(pts)]
    assert CellSet(map(tuple, G.cells_of(pts))) <= cells


def test_cellset_algebra_and_json():
    a = CellSet([(2, 1), (0, 0), (1, 3)])
    b = CellSet([(0, 0), (5, 5)])
    assert a | b == CellSet([(0, 0), (1, 3), (2, 1), (5, 5)])
    assert a & b == CellSet([(0, 0)])
    assert a - b == CellSet([(1, 3), (2, 1)])
    assert CellSet([(0, 0)]) <= a and not a.isdisjoint(b)
    assert a.to_json() == "[[0,0],[1,3],[2,1]]"
    assert CellSet.from_json(a.to_json()) == a
    assert list(a) == sorted(a)


def test_grid_rejects_bad_counts():
    with pytest.raises(ValueError):
        Grid(Box([0], [1]), (0,))
