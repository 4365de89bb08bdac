"""Dyadic squares, square paths and polynomially convex hulls of square unions.

Squares are stored by exact integer coordinates ``(k, i, j)``: the closed
square ``[i, i+1] x [j, j+1]`` scaled by ``2**-k``.  Floating point only
appears when a square is converted to the complex plane.

Grids used by the hull routines are boolean arrays indexed ``[i - i0, j - j0]``
(first axis is x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import ndimage

from .errors import InvalidInputError

__all__ = [
    "DyadicSquare",
    "SquareSet",
    "BarrierCurve",
    "locate_square",
    "is_path_of_squares",
    "fill_hull",
    "grid_boundary",
    "polynomial_hull",
    "polynomial_hull_boundary",
    "square_gap_sq",
]

_CROSS = ndimage.generate_binary_structure(2, 1)
_FULL = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True, order=True)
class DyadicSquare:
    k: int
    i: int
    j: int

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.k)

    @property
    def area(self) -> float:
        return math.ldexp(1.0, -2 * self.k)

    @property
    def corner(self) -> complex:
        return complex(math.ldexp(self.i, -self.k), math.ldexp(self.j, -self.k))

    @property
    def center(self) -> complex:
        return self.corner + complex(self.side, self.side) / 2

    def closure_contains(self, z: complex) -> bool:
        x, y = z.real * 2.0**self.k, z.imag * 2.0**self.k
        return self.i <= x <= self.i + 1 and self.j <= y <= self.j + 1

    def children(self) -> list["DyadicSquare"]:
        return [DyadicSquare(self.k + 1, 2 * self.i + a, 2 * self.j + b)
                for a in (0, 1) for b in (0, 1)]

    def distance(self, other: "DyadicSquare") -> float:
        """Euclidean distance between the two closed squares (same generation)."""
        if other.k != self.k:
            raise InvalidInputError("distance is defined for squares of one generation")
        return math.sqrt(square_gap_sq(self.i - other.i, self.j - other.j)) * self.side


def square_gap_sq(di, dj):
    """Squared gap, in units of the side, between closed lattice squares offset by (di, dj)."""
    gx = np.maximum(np.abs(di) - 1, 0)
    gy = np.maximum(np.abs(dj) - 1, 0)
    return gx * gx + gy * gy


@dataclass(frozen=True)
class SquareSet:
    """Squares of a single generation, stored as a frozenset of ``(i, j)``."""

    k: int
    cells: frozenset = frozenset()

    @classmethod
    def of(cls, squares: Iterable[DyadicSquare], k: int | None = None) -> "SquareSet":
        squares = list(squares)
        if k is None:
            if not squares:
                raise InvalidInputError("cannot infer the generation of an empty set")
            k = squares[0].k
        if any(s.k != k for s in squares):
            raise InvalidInputError("all squares of a SquareSet must share one generation")
        return cls(k, frozenset((s.i, s.j) for s in squares))

    @classmethod
    def from_grid(cls, k: int, mask: np.ndarray, i0: int, j0: int) -> "SquareSet":
        ii, jj = np.nonzero(mask)
        return cls(k, frozenset(zip((ii + i0).tolist(), (jj + j0).tolist())))

    def __contains__(self, item) -> bool:
        if isinstance(item, DyadicSquare):
            return item.k == self.k and (item.i, item.j) in self.cells
        return tuple(item) in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        for i, j in sorted(self.cells):
            yield DyadicSquare(self.k, i, j)

    def bounds(self) -> tuple[int, int, int, int]:
        """Inclusive index bounds ``(imin, jmin, imax, jmax)``."""
        if not self.cells:
            raise InvalidInputError("empty square set has no bounds")
        ii = [c[0] for c in self.cells]
        jj = [c[1] for c in self.cells]
        return min(ii), min(jj), max(ii), max(jj)

    def to_grid(self, pad: int = 0):
        """Boolean grid and its index origin ``(mask, i0, j0)``."""
        imin, jmin, imax, jmax = self.bounds()
        i0, j0 = imin - pad, jmin - pad
        mask = np.zeros((imax - imin + 1 + 2 * pad, jmax - jmin + 1 + 2 * pad), dtype=bool)
        if self.cells:
            idx = np.array(sorted(self.cells))
            mask[idx[:, 0] - i0, idx[:, 1] - j0] = True
        return mask, i0, j0

    def union(self, other: "SquareSet") -> "SquareSet":
        if other.k != self.k:
            raise InvalidInputError("generation mismatch in union")
        return SquareSet(self.k, self.cells | other.cells)


@dataclass(frozen=True)
class BarrierCurve:
    """Closed lattice polygon(s) on the generation-``k`` grid.

    ``loops`` holds vertex cycles in integer lattice units (last vertex not
    repeated); consecutive vertices differ by one unit step, so the number of
    unit edges equals the number of vertices.
    """

    k: int
    loops: tuple

    @property
    def edge_count(self) -> int:
        return sum(len(loop) for loop in self.loops)

    @property
    def length(self) -> float:
        return self.edge_count * math.ldexp(1.0, -self.k)

    def edges(self) -> frozenset:
        out = set()
        for loop in self.loops:
            for a, b in zip(loop, loop[1:] + loop[:1]):
                out.add((min(a, b), max(a, b)))
        return frozenset(out)

    def corners(self) -> list[list[complex]]:
        """Each loop reduced to its turning vertices, as complex coordinates."""
        h = math.ldexp(1.0, -self.k)
        result = []
        for loop in self.loops:
            n = len(loop)
            keep = []
            for t in range(n):
                p, c, q = loop[t - 1], loop[t], loop[(t + 1) % n]
                if (c[0] - p[0], c[1] - p[1]) != (q[0] - c[0], q[1] - c[1]):
                    keep.append(complex(c[0] * h, c[1] * h))
            result.append(keep)
        return result


def locate_square(z: complex, k: int) -> DyadicSquare:
    """Generation-``k`` square whose closure contains ``z``.

    Points on grid lines go to the square whose half-open cell
    ``[i, i+1) x [j, j+1)`` contains them, i.e. ``i = floor(x * 2**k)``.
    """
    if k < 0:
        raise InvalidInputError("generation must be non-negative")
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInputError("cannot locate a non-finite point")
    return DyadicSquare(k, math.floor(math.ldexp(z.real, k)), math.floor(math.ldexp(z.imag, k)))


def is_path_of_squares(seq) -> bool:
    """True iff the interior of the union of the closed squares is connected.

    For squares of one generation this is edge (4-) connectivity of the set;
    the order of ``seq`` is irrelevant.
    """
    seq = list(seq)
    if not seq:
        return False
    if len({s.k for s in seq}) != 1:
        raise InvalidInputError("path of squares requires a single generation")
    mask, _, _ = SquareSet.of(seq).to_grid()
    _, n = ndimage.label(mask, structure=_CROSS)
    return n == 1


def fill_hull(mask: np.ndarray) -> np.ndarray:
    """Union of ``mask`` with the bounded components of its complement.

    The grid is padded by two cells; complement cells are joined across
    edges only, since a shared corner of two filled closed squares blocks
    passage.
    """
    padded = np.pad(mask, 2)
    labels, _ = ndimage.label(~padded, structure=_CROSS)
    outside = labels == labels[0, 0]
    return ~outside[2:-2, 2:-2]


def grid_boundary(k: int, mask: np.ndarray, i0: int, j0: int) -> BarrierCurve:
    """Oriented boundary loops of a cell set (filled cells on the left)."""
    padded = np.pad(mask, 1)
    out_edges: dict = {}

    def add(a, b):
        out_edges.setdefault(a, []).append(b)

    ii, jj = np.nonzero(mask)
    for a, b in zip(ii.tolist(), jj.tolist()):
        pa, pb = a + 1, b + 1
        i, j = a + i0, b + j0
        if not padded[pa, pb - 1]:
            add((i, j), (i + 1, j))
        if not padded[pa + 1, pb]:
            add((i + 1, j), (i + 1, j + 1))
        if not padded[pa, pb + 1]:
            add((i + 1, j + 1), (i, j + 1))
        if not padded[pa - 1, pb]:
            add((i, j + 1), (i, j))

    loops = []
    remaining = {v: sorted(ws) for v, ws in out_edges.items()}
    while remaining:
        start = min(remaining)
        loop = []
        prev, cur = None, start
        while cur in remaining:
            loop.append(cur)
            options = remaining[cur]
            nxt = options[0]
            if prev is not None and len(options) > 1:
                # at a pinch vertex keep turning right so one walk traces the whole boundary
                d = (cur[0] - prev[0], cur[1] - prev[1])
                want = (cur[0] + d[1], cur[1] - d[0])
                if want in options:
                    nxt = want
            options.remove(nxt)
            if not options:
                del remaining[cur]
            prev, cur = cur, nxt
        loops.append(tuple(loop))
    return BarrierCurve(k, tuple(loops))


def polynomial_hull(s: SquareSet) -> SquareSet:
    """Cells of the union of ``s`` together with all bounded complement components."""
    mask, i0, j0 = s.to_grid()
    _require_connected(mask)
    return SquareSet.from_grid(s.k, fill_hull(mask), i0, j0)


def polynomial_hull_boundary(s: SquareSet) -> BarrierCurve:
    mask, i0, j0 = s.to_grid()
    _require_connected(mask)
    return grid_boundary(s.k, fill_hull(mask), i0, j0)


def _require_connected(mask):
    if not mask.any():
        raise InvalidInputError("empty square set")
    _, n = ndimage.label(mask, structure=_FULL)
    if n != 1:
        raise InvalidInputError(f"union of closed squares is disconnected ({n} pieces)")
