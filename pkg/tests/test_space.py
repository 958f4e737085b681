import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semirec.space import ESCAPE, Grid, OutOfDomain, PhaseSpace

from conftest import BOX2, CIRCLE, UNIT


def test_distance_examples():
    assert BOX2.dist(-1.0, 0.0) == 1.0
    assert CIRCLE.dist(0.1, 0.9) == pytest.approx(0.2)
    plane = PhaseSpace.box((-5, 5), (-5, 5))
    assert plane.dist((0.0, 0.0), (3.0, 4.0)) == 5.0


def test_bad_spaces_rejected():
    with pytest.raises(ValueError):
        PhaseSpace.box((1, 0))
    with pytest.raises(ValueError):
        PhaseSpace("circle", ((0, 2),))
    with pytest.raises(ValueError):
        PhaseSpace.box((0, 1), (0, 1), (0, 1))
    with pytest.raises(ValueError):
        Grid.uniform(UNIT, 1)


def test_cell_examples():
    g = Grid.uniform(BOX2, 4)
    assert g.cell_of(-1.9) == (0,)
    assert g.center_of(0) == -1.5
    assert Grid.uniform(UNIT, 10).cell_of(0.55) == (5,)


def test_boundary_ties_go_to_the_lower_index_except_at_the_top():
    g = Grid.uniform(BOX2, 4)
    assert g.cell_of(-1.0) == (1,)  # [-1, 0) is cell 1
    assert g.cell_of(2.0) == (3,)
    assert g.cell_of(-2.0) == (0,)
    with pytest.raises(OutOfDomain):
        g.cell_of(2.0000001)
    assert g.flat_cells(np.array([[3.0, np.nan]])).tolist() == [ESCAPE, ESCAPE]


@pytest.mark.parametrize("grid", [Grid.uniform(BOX2, 7), Grid.uniform(CIRCLE, 9), Grid(PhaseSpace.box((0, 1), (-1, 1)), (4, 5))])
def test_center_round_trip(grid):
    for i in range(grid.n_cells):
        assert grid.flat(grid.cell_of(grid.center_of(i))) == i


@given(st.floats(-2, 2), st.integers(2, 50))
def test_center_error_bound(x, n):
    g = Grid.uniform(BOX2, n)
    c = g.center_of(g.cell_of(x))
    assert BOX2.dist(x, c) <= g.delta * math.sqrt(g.dim) / 2 + 1e-15


triples = st.tuples(*[st.floats(0, 1, exclude_max=True)] * 3)


@given(triples)
def test_circle_triangle_inequality(t):
    x, y, z = t
    assert CIRCLE.dist(x, z) <= CIRCLE.dist(x, y) + CIRCLE.dist(y, z) + 1e-15
    assert CIRCLE.dist(x, y) == CIRCLE.dist(y, x)


def test_triangle_inequality_ten_thousand_triples():
    rng = np.random.default_rng(7)
    plane = PhaseSpace.box((-3, 3), (-3, 3))
    for space in (BOX2, CIRCLE, plane):
        lo, hi = space.bounds[0]
        pts = rng.uniform(lo, hi, (3, space.dim, 10_000))
        a, b, c = pts
        ab, bc, ac = space.dist_batch(a, b), space.dist_batch(b, c), space.dist_batch(a, c)
        assert np.all(ac <= ab + bc + 1e-12)


@pytest.mark.parametrize("space,n", [(BOX2, 40), (CIRCLE, 25), (PhaseSpace.box((0, 1), (0, 2)), 12)])
def test_cells_near_matches_brute_force(space, n):
    g = Grid.uniform(space, n)
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = np.array([rng.uniform(lo - 0.2, hi + 0.2) for lo, hi in space.bounds])
        r = rng.uniform(0.01, 0.6)
        d = space.dist_batch(g.centers, p.reshape(-1, 1))
        assert sorted(g.cells_near(p, r).tolist()) == np.flatnonzero(d < r).tolist()


def test_neighbors_wrap_on_the_circle():
    g = Grid.uniform(CIRCLE, 10)
    assert sorted(g.neighbors(0)) == [0, 1, 9]
    assert sorted(Grid.uniform(BOX2, 10).neighbors(0)) == [0, 1]
