"""Finite planar measures built from atoms, arc-length densities and area densities.

Quadrature is shape adapted: periodic trapezoid in angle for full circles,
Gauss-Legendre along segments, arcs and radii, polar tensor rules for disks
and annuli, and tensor Gauss-Legendre for rectangles.  A component clipped by
a region is integrated exactly up to the region boundary: arcs are split at
their crossings with the region boundary, areas use a polar rule whose radial
limits follow the clipped ray intervals.

The resolution ``m`` sets node counts: ``4m`` angles on circles, ``2m`` nodes
per segment, ``m`` radial by ``4m`` angular nodes on disks and annuli.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Union

import numpy as np

from .errors import InvalidInputError, NumericDomainError
from .shapes import (Annulus, Circle, Complement, Disk, Intersection, Rectangle, Region,
                     Segment, TWO_PI, bbox_of, curve_intersections, gauss_legendre,
                     polar_rule)

Density = Union[complex, float, Callable]


def eval_density(density, z):
    z = np.asarray(z, dtype=complex)
    if callable(density):
        return np.broadcast_to(np.asarray(density(z), dtype=complex), z.shape)
    return np.full(z.shape, complex(density))


@dataclass(frozen=True)
class Atom:
    point: complex
    mass: complex = 1.0
    label: str = ""

    def rule(self, m):
        return np.array([complex(self.point)]), np.array([complex(self.mass)])

    def bbox(self):
        p = complex(self.point)
        return p.real, p.imag, p.real, p.imag

    def distance(self, z):
        return np.abs(np.asarray(z) - self.point)

    def spacing(self, m):
        return 0.0


@dataclass(frozen=True)
class ArcDensity:
    """Density (against arc length) on a circle or a segment, optionally clipped."""

    curve: Union[Circle, Segment]
    density: Density = 1.0
    label: str = ""
    clip: Region | None = None

    @cached_property
    def pieces(self):
        """Parameter intervals of the curve lying in the clip region (None = whole curve)."""
        if self.clip is None:
            return None
        cuts = []
        for bc in self.clip.curves():
            for x in curve_intersections(self.curve, bc):
                cuts.append(self.curve.param_of(x))
        if isinstance(self.curve, Circle):
            cuts = sorted({round(c % TWO_PI, 15) for c in cuts})
            if not cuts:
                mid = self.curve.point(0.0)
                return None if bool(self.clip.contains(mid)) else ()
            ends = cuts + [cuts[0] + TWO_PI]
        else:
            ends = sorted({0.0, 1.0, *[c for c in cuts if 0.0 < c < 1.0]})
        out = []
        for lo, hi in zip(ends[:-1], ends[1:]):
            if hi - lo < 1e-15:
                continue
            if bool(self.clip.contains(self.curve.point((lo + hi) / 2))):
                out.append((lo, hi))
        if isinstance(self.curve, Circle) and len(out) == len(ends) - 1 and len(out) > 0:
            return None
        return tuple(out)

    def _piece_rule(self, lo, hi, n):
        x, w = gauss_legendre(n)
        t = lo + (hi - lo) * (x + 1) / 2
        pts = self.curve.point(t)
        speed = self.curve.radius if isinstance(self.curve, Circle) else self.curve.length
        return pts, w * (hi - lo) / 2 * speed

    def rule(self, m, n=None):
        curve = self.curve
        if self.pieces is None:
            if isinstance(curve, Circle):
                n = n or 4 * m
                t = (np.arange(n) + 0.5) * (TWO_PI / n)
                pts = curve.point(t)
                w = np.full(n, curve.radius * TWO_PI / n)
            else:
                pts, w = self._piece_rule(0.0, 1.0, n or 2 * m)
        else:
            parts = []
            full = TWO_PI if isinstance(curve, Circle) else 1.0
            for lo, hi in self.pieces:
                k = n or max(16, int(math.ceil(2 * m * (hi - lo) / full)))
                parts.append(self._piece_rule(lo, hi, k))
            if not parts:
                return np.empty(0, complex), np.empty(0, complex)
            pts = np.concatenate([p for p, _ in parts])
            w = np.concatenate([q for _, q in parts])
        return pts, w * eval_density(self.density, pts)

    def bbox(self):
        return self.curve.bbox()

    def distance(self, z):
        return self.curve.distance(z)

    def spacing(self, m):
        if isinstance(self.curve, Circle):
            return self.curve.length / (4 * m)
        return self.curve.length / (2 * m)


@dataclass(frozen=True)
class AreaDensity:
    """Density (against area) on a disk, annulus or rectangle, optionally clipped."""

    shape: Union[Disk, Annulus, Rectangle]
    density: Density = 1.0
    label: str = ""
    clip: Region | None = None

    @property
    def region(self) -> Region:
        return self.shape if self.clip is None else Intersection((self.shape, self.clip))

    def rule(self, m):
        shape = self.shape
        if self.clip is not None:
            pr = polar_rule(shape.center, self.region, n_theta=4 * m, n_radial=m)
            pts, w = pr.points, pr.area_weights
        elif isinstance(shape, Rectangle):
            x, wx = gauss_legendre(2 * m)
            d = shape.hi - shape.lo
            xs = shape.lo.real + d.real * (x + 1) / 2
            ys = shape.lo.imag + d.imag * (x + 1) / 2
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            pts = (X + 1j * Y).ravel()
            w = np.outer(wx * d.real / 2, wx * d.imag / 2).ravel()
        else:
            r0, r1 = (0.0, shape.radius) if isinstance(shape, Disk) else (shape.inner, shape.outer)
            x, wx = gauss_legendre(m)
            r = r0 + (r1 - r0) * (x + 1) / 2
            wr = wx * (r1 - r0) / 2 * r
            nt = 4 * m
            t = (np.arange(nt) + 0.5) * (TWO_PI / nt)
            pts = (shape.center + np.outer(r, np.exp(1j * t))).ravel()
            w = np.outer(wr, np.full(nt, TWO_PI / nt)).ravel()
        return pts, w * eval_density(self.density, pts)

    def bbox(self):
        return self.shape.bbox()

    def distance(self, z):
        return self.shape.distance(z)

    def spacing(self, m):
        s = self.shape
        if isinstance(s, Rectangle):
            d = s.hi - s.lo
            return max(d.real, d.imag) / (2 * m)
        outer = s.radius if isinstance(s, Disk) else s.outer
        inner = 0.0 if isinstance(s, Disk) else s.inner
        return max((outer - inner) / m, TWO_PI * outer / (4 * m))


Component = Union[Atom, ArcDensity, AreaDensity]


@dataclass(frozen=True)
class PlanarMeasure:
    components: tuple
    m: int = 64
    positive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.m < 1:
            raise InvalidInputError("resolution m must be >= 1")
        labels = [c.label for c in self.components]
        named = [x for x in labels if x]
        if len(set(named)) != len(named):
            dup = sorted({x for x in named if named.count(x) > 1})
            raise InvalidInputError(f"duplicate component labels: {dup}")
        if any(not x for x in labels):
            fixed = []
            used = set(named)
            for idx, c in enumerate(self.components):
                if c.label:
                    fixed.append(c)
                    continue
                n = idx + 1
                while f"c{n}" in used:
                    n += 1
                used.add(f"c{n}")
                fixed.append(replace(c, label=f"c{n}"))
            object.__setattr__(self, "components", tuple(fixed))
        if self.positive:
            for c in self.components:
                _, w = c.rule(min(self.m, 16))
                if np.any(np.abs(w.imag) > 1e-14 * np.maximum(np.abs(w), 1e-300)) or np.any(w.real < 0):
                    raise InvalidInputError(f"component {c.label!r} is not positive")

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.components]

    def component(self, label: str) -> Component:
        for c in self.components:
            if c.label == label:
                return c
        raise InvalidInputError(f"unknown label {label!r}")

    @cached_property
    def _rules(self):
        return [c.rule(self.m) for c in self.components]

    def nodes(self):
        """All quadrature nodes and complex weights, in component order."""
        if not self.components:
            return np.empty(0, complex), np.empty(0, complex)
        pts = np.concatenate([p for p, _ in self._rules])
        w = np.concatenate([w for _, w in self._rules])
        return pts, w

    def with_resolution(self, m: int) -> "PlanarMeasure":
        return PlanarMeasure(self.components, m, self.positive)

    def bbox(self):
        return bbox_of(self.components)

    def distance(self, z):
        """Distance from ``z`` to the union of component supports (shape level)."""
        z = np.asarray(z, dtype=complex)
        if not self.components:
            return np.full(z.shape, np.inf)
        return np.min([np.asarray(c.distance(z), dtype=float) for c in self.components], axis=0)


def atom(point, mass=1.0, label=""):
    return Atom(complex(point), complex(mass), label)


def circle_measure(center=0j, radius=1.0, mass=1.0, label=""):
    """Uniform arc-length measure of total mass ``mass`` on a circle."""
    return ArcDensity(Circle(complex(center), float(radius)), mass / (TWO_PI * radius), label)


def segment_measure(a, b, density=1.0, label=""):
    return ArcDensity(Segment(complex(a), complex(b)), density, label)


def disk_measure(center=0j, radius=1.0, density=1.0, label=""):
    return AreaDensity(Disk(complex(center), float(radius)), density, label)


def annulus_measure(center=0j, inner=0.5, outer=1.0, density=1.0, label=""):
    return AreaDensity(Annulus(complex(center), float(inner), float(outer)), density, label)


def measure(*components, m=64, positive=False) -> PlanarMeasure:
    return PlanarMeasure(tuple(components), m, positive)


def total_mass(mu: PlanarMeasure):
    _, w = mu.nodes()
    s = complex(np.sum(w))
    return s.real if s.imag == 0 else s


def integrate(mu: PlanarMeasure, f: Callable) -> complex:
    pts, w = mu.nodes()
    vals = np.asarray(f(pts), dtype=complex)
    vals = np.broadcast_to(vals, pts.shape)
    if not np.all(np.isfinite(vals)):
        raise NumericDomainError("integrand is not finite at some quadrature nodes")
    return complex(np.sum(vals * w))


def restrict(mu: PlanarMeasure, where) -> PlanarMeasure:
    """Restriction to a set of labels (iterable of str) or to a region.

    Region restriction clips each component; an atom is kept when its point
    lies in the closed region.
    """
    if isinstance(where, str):
        where = [where]
    if isinstance(where, Region):
        comps = []
        for c in mu.components:
            if isinstance(c, Atom):
                if bool(where.contains(c.point)):
                    comps.append(c)
                continue
            clip = where if c.clip is None else Intersection((c.clip, where))
            comps.append(replace(c, clip=clip))
        return PlanarMeasure(tuple(comps), mu.m, mu.positive)
    labels = list(where)
    known = set(mu.labels)
    for x in labels:
        if x not in known:
            raise InvalidInputError(f"unknown label {x!r}")
    keep = set(labels)
    return PlanarMeasure(tuple(c for c in mu.components if c.label in keep), mu.m, mu.positive)


def complement(region: Region) -> Region:
    return Complement(region)
