"""Dyadic squares, square paths and hulls of square unions."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from planar_abpe.errors import InvalidInputError
from planar_abpe.geometry import (DyadicSquare, SquareSet, fill_hull, is_path_of_squares,
                                  locate_square, polynomial_hull, polynomial_hull_boundary)


@pytest.mark.parametrize("z, k, corner, side", [
    (0.3 + 0.4j, 1, 0j, 0.5),
    (0j, 0, 0j, 1.0),
    (-0.25 - 0.25j, 2, -0.25 - 0.25j, 0.25),
])
def test_locate_square_examples(z, k, corner, side):
    s = locate_square(z, k)
    assert s.corner == corner
    assert s.side == side
    assert s.closure_contains(z)


def test_locate_square_rejects_negative_generation():
    with pytest.raises(InvalidInputError):
        locate_square(0.1, -1)


coords = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(x=coords, y=coords, k=st.integers(min_value=0, max_value=20))
def test_locate_square_contains_and_idempotent(x, y, k):
    z = complex(x, y)
    s = locate_square(z, k)
    assert s.closure_contains(z)
    assert locate_square(s.corner, k) == s
    assert locate_square(s.center, k) == s


def test_locate_square_bulk_random():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        z = complex(*rng.uniform(-10, 10, 2))
        k = int(rng.integers(0, 16))
        assert locate_square(z, k).closure_contains(z)


def test_square_metrics_and_children():
    s = DyadicSquare(3, -2, 5)
    assert s.side == 1 / 8 and s.area == 1 / 64
    kids = s.children()
    assert len(kids) == 4 and all(c.k == 4 for c in kids)
    assert sum(c.area for c in kids) == s.area
    assert DyadicSquare(2, 0, 0).distance(DyadicSquare(2, 3, 4)) == pytest.approx(math.hypot(2, 3) / 4)
    assert DyadicSquare(2, 0, 0).distance(DyadicSquare(2, 1, 1)) == 0.0


@pytest.mark.parametrize("squares, expected", [
    ([DyadicSquare(1, 0, 0), DyadicSquare(1, 1, 0)], True),
    ([DyadicSquare(1, 0, 0), DyadicSquare(1, 1, 1)], False),
    ([DyadicSquare(1, 0, 0)], True),
])
def test_is_path_of_squares_examples(squares, expected):
    assert is_path_of_squares(squares) is expected


def test_is_path_rejects_mixed_generations():
    with pytest.raises(InvalidInputError):
        is_path_of_squares([DyadicSquare(1, 0, 0), DyadicSquare(2, 0, 0)])


cells = st.sets(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=25)


@settings(max_examples=100, deadline=None)
@given(cells=cells, seed=st.integers(0, 2**16))
def test_is_path_permutation_invariant(cells, seed):
    sq = [DyadicSquare(2, i, j) for i, j in sorted(cells)]
    perm = list(np.random.default_rng(seed).permutation(len(sq)))
    assert is_path_of_squares(sq) == is_path_of_squares([sq[p] for p in perm])


def test_hull_boundary_single_square():
    b = polynomial_hull_boundary(SquareSet.of([DyadicSquare(2, 1, 1)]))
    assert b.edge_count == 4
    assert len(b.loops) == 1
    assert sorted(b.corners()[0], key=lambda z: (z.real, z.imag)) == [0.25 + 0.25j, 0.25 + 0.5j,
                                                                     0.5 + 0.25j, 0.5 + 0.5j]


def test_hull_fills_ring_hole():
    ring = SquareSet(1, frozenset((i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)))
    hull = polynomial_hull(ring)
    assert (1, 1) in hull.cells and len(hull) == 9
    b = polynomial_hull_boundary(ring)
    assert len(b.loops) == 1 and b.edge_count == 12


def test_hull_of_block():
    block = SquareSet(3, frozenset((i, j) for i in range(2) for j in range(2)))
    b = polynomial_hull_boundary(block)
    assert b.edge_count == 8
    assert b.length == pytest.approx(4 * 2 * 2 ** -3)


def test_hull_rejects_disconnected():
    with pytest.raises(InvalidInputError):
        polynomial_hull(SquareSet(1, frozenset({(0, 0), (3, 3)})))


@settings(max_examples=100, deadline=None)
@given(cells=cells)
def test_hull_properties(cells):
    s = SquareSet(2, frozenset(cells))
    mask, i0, j0 = s.to_grid()
    _, pieces = ndimage.label(mask, structure=np.ones((3, 3), bool))
    if pieces != 1:
        with pytest.raises(InvalidInputError):
            polynomial_hull(s)
        return
    hull = polynomial_hull(s)
    assert s.cells <= hull.cells
    # complement of the hull, inside a padded box, is one component reaching the pad
    hmask, hi0, hj0 = hull.to_grid(pad=2)
    lab, n = ndimage.label(~hmask, structure=ndimage.generate_binary_structure(2, 1))
    assert n == 1
    # fill_hull is idempotent
    assert np.array_equal(fill_hull(fill_hull(mask)), fill_hull(mask))
