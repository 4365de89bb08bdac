"""Primitive planar shapes, curves and regions.

Every region answers three questions used by the quadrature code:

* ``contains(z)``: vectorized membership (closed shapes),
* ``ray_intervals(origin, theta)``: the parameter intervals ``[a, b]`` (s >= 0)
  on which ``origin + s*exp(i*theta)`` lies in the region, returned as two
  arrays of shape ``(len(theta), K)`` with empty slots encoded as ``a == b``,
* ``curves()``: boundary curves, from which angular breakpoints are derived.

Interval lists are always pairwise disjoint, which is what lets
intersection, complement and union stay vectorized with a fixed slot count.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# curves

@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError("circle radius must be positive")

    def point(self, t):
        return self.center + self.radius * np.exp(1j * np.asarray(t))

    def distance(self, z):
        return np.abs(np.abs(np.asarray(z) - self.center) - self.radius)

    @property
    def length(self) -> float:
        return TWO_PI * self.radius

    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.imag - r, c.real + r, c.imag + r

    def param_of(self, z) -> float:
        return cmath.phase(complex(z) - self.center) % TWO_PI


@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def __post_init__(self):
        if self.a == self.b:
            raise InvalidInputError("degenerate segment")

    def point(self, t):
        return self.a + (self.b - self.a) * np.asarray(t)

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        d = self.b - self.a
        t = np.clip(((z - self.a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
        return np.abs(z - (self.a + t * d))

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def bbox(self):
        return (min(self.a.real, self.b.real), min(self.a.imag, self.b.imag),
                max(self.a.real, self.b.real), max(self.a.imag, self.b.imag))

    def param_of(self, z) -> float:
        d = self.b - self.a
        return ((complex(z) - self.a) * d.conjugate()).real / abs(d) ** 2


@dataclass(frozen=True)
class Line:
    """Infinite line through ``point`` with direction ``direction``."""

    point: complex
    direction: complex


def _line_params(p, u, curve):
    """Parameters t (point p + t u) where the line meets ``curve``."""
    if isinstance(curve, Circle):
        w = p - curve.center
        A = abs(u) ** 2
        B = 2 * (w * u.conjugate()).real
        C = abs(w) ** 2 - curve.radius ** 2
        disc = B * B - 4 * A * C
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return [(-B - r) / (2 * A), (-B + r) / (2 * A)]
    if isinstance(curve, (Line, Segment)):
        q, v = (curve.point, curve.direction) if isinstance(curve, Line) else (curve.a, curve.b - curve.a)
        den = (u.conjugate() * v).imag
        if abs(den) < 1e-300:
            return []
        t = ((q - p).conjugate() * v).imag / den
        if isinstance(curve, Segment):
            s = ((q - p).conjugate() * u).imag / den
            if not -1e-12 <= s <= 1 + 1e-12:
                return []
        return [t]
    raise TypeError(curve)


def curve_intersections(c1, c2) -> list[complex]:
    """Intersection points of two boundary curves (tangency counted once)."""
    if isinstance(c1, Circle) and isinstance(c2, Circle):
        d = abs(c2.center - c1.center)
        if d == 0 or d > c1.radius + c2.radius or d < abs(c1.radius - c2.radius):
            return []
        a = (c1.radius ** 2 - c2.radius ** 2 + d * d) / (2 * d)
        h = math.sqrt(max(c1.radius ** 2 - a * a, 0.0))
        e = (c2.center - c1.center) / d
        m = c1.center + a * e
        return [m + 1j * h * e, m - 1j * h * e]
    if isinstance(c1, Circle):
        c1, c2 = c2, c1
    p, u = (c1.point, c1.direction) if isinstance(c1, Line) else (c1.a, c1.b - c1.a)
    ts = _line_params(p, u, c2)
    if isinstance(c1, Segment):
        ts = [t for t in ts if -1e-12 <= t <= 1 + 1e-12]
    return [p + t * u for t in ts]


def curve_breakpoint_angles(curve, origin: complex) -> list[float]:
    """Ray directions from ``origin`` at which the curve's intersection pattern changes."""
    if isinstance(curve, Circle):
        w = curve.center - origin
        d = abs(w)
        if d <= curve.radius * (1 - 1e-14):
            return []
        half = math.asin(min(1.0, curve.radius / d))
        base = cmath.phase(w)
        return [base - half, base + half]
    if isinstance(curve, Segment):
        out = []
        for end in (curve.a, curve.b):
            if end != origin:
                out.append(cmath.phase(end - origin))
        return out
    if isinstance(curve, Line):
        base = cmath.phase(curve.direction)
        return [base, base + math.pi]
    raise TypeError(curve)


# --------------------------------------------------------------------------
# regions

class Region:
    """Base class; subclasses implement the three queries described above."""

    def contains(self, z):
        raise NotImplementedError

    def ray_intervals(self, origin: complex, theta: np.ndarray):
        raise NotImplementedError

    def curves(self) -> list:
        raise NotImplementedError

    def breakpoints(self, origin: complex) -> np.ndarray:
        curves = self.curves()
        angles = []
        for c in curves:
            angles.extend(curve_breakpoint_angles(c, origin))
        for a in range(len(curves)):
            for b in range(a + 1, len(curves)):
                for x in curve_intersections(curves[a], curves[b]):
                    if abs(x - origin) > 1e-14:
                        angles.append(cmath.phase(x - origin))
        if not angles:
            return np.empty(0)
        angles = np.sort(np.mod(angles, TWO_PI))
        keep = np.concatenate([[True], np.diff(angles) > 1e-12])
        angles = angles[keep]
        if len(angles) > 1 and angles[-1] - angles[0] > TWO_PI - 1e-12:
            angles = angles[:-1]
        return angles

    def distance(self, z):
        raise NotImplementedError

    def __and__(self, other):
        return Intersection((self, other))

    def __or__(self, other):
        return Union((self, other))

    def __invert__(self):
        return Complement(self)


def _disk_ray(origin, theta, center, radius):
    w = origin - center
    e = np.exp(1j * theta)
    p = (w * np.conj(e)).real
    c = abs(w) ** 2 - radius ** 2
    disc = p * p - c
    root = np.sqrt(np.maximum(disc, 0.0))
    a = np.maximum(-p - root, 0.0)
    b = np.maximum(-p + root, 0.0)
    empty = disc <= 0
    b = np.where(empty, a, b)
    return a[:, None], b[:, None]


@dataclass(frozen=True)
class Disk(Region):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError("disk radius must be positive")

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) <= self.radius

    def ray_intervals(self, origin, theta):
        return _disk_ray(origin, np.asarray(theta, dtype=float), self.center, self.radius)

    def curves(self):
        return [Circle(self.center, self.radius)]

    def distance(self, z):
        return np.maximum(np.abs(np.asarray(z) - self.center) - self.radius, 0.0)

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    def bbox(self):
        return Circle(self.center, self.radius).bbox()


@dataclass(frozen=True)
class Annulus(Region):
    center: complex
    inner: float
    outer: float

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise InvalidInputError("annulus needs 0 < inner < outer")

    def contains(self, z):
        r = np.abs(np.asarray(z) - self.center)
        return (r >= self.inner) & (r <= self.outer)

    def ray_intervals(self, origin, theta):
        theta = np.asarray(theta, dtype=float)
        oa, ob = _disk_ray(origin, theta, self.center, self.outer)
        ia, ib = _disk_ray(origin, theta, self.center, self.inner)
        return _subtract(oa, ob, ia, ib)

    def curves(self):
        return [Circle(self.center, self.outer), Circle(self.center, self.inner)]

    def distance(self, z):
        r = np.abs(np.asarray(z) - self.center)
        return np.maximum(np.maximum(r - self.outer, self.inner - r), 0.0)

    @property
    def area(self) -> float:
        return math.pi * (self.outer ** 2 - self.inner ** 2)

    def bbox(self):
        return Circle(self.center, self.outer).bbox()


@dataclass(frozen=True)
class Rectangle(Region):
    lo: complex
    hi: complex

    def __post_init__(self):
        if not (self.lo.real < self.hi.real and self.lo.imag < self.hi.imag):
            raise InvalidInputError("rectangle needs lo < hi in both coordinates")

    def contains(self, z):
        z = np.asarray(z)
        return ((z.real >= self.lo.real) & (z.real <= self.hi.real)
                & (z.imag >= self.lo.imag) & (z.imag <= self.hi.imag))

    def ray_intervals(self, origin, theta):
        theta = np.asarray(theta, dtype=float)
        dx, dy = np.cos(theta), np.sin(theta)
        lo = np.zeros_like(theta)
        hi = np.full_like(theta, np.inf)
        for o, d, a, b in ((origin.real, dx, self.lo.real, self.hi.real),
                           (origin.imag, dy, self.lo.imag, self.hi.imag)):
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (a - o) / d
                t2 = (b - o) / d
            par = np.abs(d) < 1e-300
            inside = (o >= a) & (o <= b)
            tmin = np.where(par, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
            tmax = np.where(par, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
            lo = np.maximum(lo, tmin)
            hi = np.minimum(hi, tmax)
        empty = ~(hi > lo)
        lo = np.where(empty, 0.0, lo)
        hi = np.where(empty, 0.0, hi)
        return lo[:, None], hi[:, None]

    def corners(self):
        lo, hi = self.lo, self.hi
        return [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag)]

    def curves(self):
        c = self.corners()
        return [Segment(c[t], c[(t + 1) % 4]) for t in range(4)]

    def distance(self, z):
        z = np.asarray(z)
        dx = np.maximum(np.maximum(self.lo.real - z.real, z.real - self.hi.real), 0.0)
        dy = np.maximum(np.maximum(self.lo.imag - z.imag, z.imag - self.hi.imag), 0.0)
        return np.hypot(dx, dy)

    @property
    def area(self) -> float:
        d = self.hi - self.lo
        return d.real * d.imag

    @property
    def center(self) -> complex:
        return (self.lo + self.hi) / 2

    def bbox(self):
        return self.lo.real, self.lo.imag, self.hi.real, self.hi.imag


@dataclass(frozen=True)
class HalfPlane(Region):
    """Closed half-plane ``{z : Re((z - point) * conj(normal)) >= 0}``."""

    point: complex
    normal: complex

    def contains(self, z):
        return ((np.asarray(z) - self.point) * np.conj(self.normal)).real >= 0

    def ray_intervals(self, origin, theta):
        theta = np.asarray(theta, dtype=float)
        f0 = ((origin - self.point) * self.normal.conjugate()).real
        slope = (np.exp(1j * theta) * self.normal.conjugate()).real
        with np.errstate(divide="ignore", invalid="ignore"):
            s0 = -f0 / slope
        up = slope > 0
        down = slope < 0
        a = np.where(up, np.maximum(s0, 0.0), 0.0)
        b = np.where(up, np.inf, np.where(down, np.maximum(s0, 0.0), np.where(f0 >= 0, np.inf, 0.0)))
        return a[:, None], b[:, None]

    def curves(self):
        return [Line(self.point, 1j * self.normal)]

    def distance(self, z):
        f = ((np.asarray(z) - self.point) * np.conj(self.normal)).real / abs(self.normal)
        return np.maximum(-f, 0.0)


@dataclass(frozen=True)
class Intersection(Region):
    parts: tuple

    def contains(self, z):
        out = self.parts[0].contains(z)
        for p in self.parts[1:]:
            out = out & p.contains(z)
        return out

    def ray_intervals(self, origin, theta):
        a, b = self.parts[0].ray_intervals(origin, theta)
        for p in self.parts[1:]:
            c, d = p.ray_intervals(origin, theta)
            a, b = _intersect(a, b, c, d)
        return a, b

    def curves(self):
        return [c for p in self.parts for c in p.curves()]

    def distance(self, z):
        # lower bound; exact when one part contains the others' intersection
        return np.max([p.distance(z) for p in self.parts], axis=0)


@dataclass(frozen=True)
class Complement(Region):
    region: Region

    def contains(self, z):
        return ~self.region.contains(z)

    def ray_intervals(self, origin, theta):
        a, b = self.region.ray_intervals(origin, theta)
        return _complement(a, b)

    def curves(self):
        return self.region.curves()

    def distance(self, z):
        # lower bound only
        return np.zeros(np.shape(z))


@dataclass(frozen=True)
class Union(Region):
    parts: tuple

    def contains(self, z):
        out = self.parts[0].contains(z)
        for p in self.parts[1:]:
            out = out | p.contains(z)
        return out

    def ray_intervals(self, origin, theta):
        inner = Intersection(tuple(Complement(p) for p in self.parts))
        return _complement(*inner.ray_intervals(origin, theta))

    def curves(self):
        return [c for p in self.parts for c in p.curves()]

    def distance(self, z):
        return np.min([p.distance(z) for p in self.parts], axis=0)


# --------------------------------------------------------------------------
# interval algebra on (n, K) slot arrays

def _intersect(a, b, c, d):
    A = np.maximum(a[:, :, None], c[:, None, :])
    B = np.minimum(b[:, :, None], d[:, None, :])
    B = np.maximum(A, B)
    n = a.shape[0]
    return A.reshape(n, -1), B.reshape(n, -1)


def _complement(a, b):
    order = np.argsort(a, axis=1, kind="stable")
    a = np.take_along_axis(a, order, axis=1)
    b = np.take_along_axis(b, order, axis=1)
    n = a.shape[0]
    starts = np.concatenate([np.zeros((n, 1)), b], axis=1)
    ends = np.concatenate([a, np.full((n, 1), np.inf)], axis=1)
    ends = np.maximum(starts, ends)
    return starts, ends


def _subtract(a, b, c, d):
    ca, cb = _complement(c, d)
    return _intersect(a, b, ca, cb)


# --------------------------------------------------------------------------
# polar quadrature about an arbitrary origin

@dataclass(frozen=True)
class PolarRule:
    """Nodes of a polar rule about ``origin``.

    ``base`` weights carry ``ds dtheta`` only: area integrals use
    ``base * s``, Cauchy kernels use ``base * exp(-1j * theta)``.
    """

    origin: complex
    points: np.ndarray
    s: np.ndarray
    theta: np.ndarray
    base: np.ndarray

    @property
    def area_weights(self):
        return self.base * self.s


def angular_nodes(breaks: np.ndarray, n_theta: int, min_per_piece: int = 12):
    """Angular nodes/weights; periodic trapezoid without breakpoints, sigmoidal GL pieces otherwise."""
    if len(breaks) == 0:
        theta = (np.arange(n_theta) + 0.5) * (TWO_PI / n_theta)
        return theta, np.full(n_theta, TWO_PI / n_theta)
    ends = np.append(breaks, breaks[0] + TWO_PI)
    thetas, weights = [], []
    for lo, hi in zip(ends[:-1], ends[1:]):
        width = hi - lo
        if width <= 0:
            continue
        n = max(min_per_piece, int(math.ceil(n_theta * width / TWO_PI)))
        x, w = gauss_legendre(n)
        u = (x + 1) / 2
        # theta - lo ~ u**2 near both ends: absorbs square-root behaviour at tangencies
        thetas.append(lo + width * (1 - np.cos(math.pi * u)) / 2)
        weights.append(w / 2 * width * math.pi * np.sin(math.pi * u) / 2)
    return np.concatenate(thetas), np.concatenate(weights)


def _finite_slots(a, b):
    """Zero out empty slots (which may sit at infinity); reject unbounded ones."""
    empty = ~(b > a)
    a, b = np.where(empty, 0.0, a), np.where(empty, 0.0, b)
    if not np.all(np.isfinite(b)):
        raise InvalidInputError("polar rule needs a bounded region")
    return a, b


def polar_rule(origin: complex, region: Region, n_theta: int = 256, n_radial: int = 32,
               extra_breaks: Sequence[float] = ()) -> PolarRule:
    origin = complex(origin)
    breaks = region.breakpoints(origin)
    if len(extra_breaks):
        breaks = np.unique(np.mod(np.concatenate([breaks, extra_breaks]), TWO_PI))
    theta, wt = angular_nodes(breaks, n_theta)
    a, b = _finite_slots(*region.ray_intervals(origin, theta))
    x, w = gauss_legendre(n_radial)
    half = (b - a) / 2
    s = (a + half)[:, :, None] + half[:, :, None] * x[None, None, :]
    ws = half[:, :, None] * w[None, None, :] * wt[:, None, None]
    th = np.broadcast_to(theta[:, None, None], s.shape)
    keep = (half > 0)[:, :, None] & np.ones_like(x, dtype=bool)[None, None, :]
    s, ws, th = s[keep], ws[keep], th[keep]
    return PolarRule(origin, origin + s * np.exp(1j * th), s, th, ws)


def polar_lengths(origin: complex, region: Region, n_theta: int = 256):
    """Angular nodes, weights and chord length ``sum(b - a)`` along each ray."""
    origin = complex(origin)
    theta, wt = angular_nodes(region.breakpoints(origin), n_theta)
    a, b = _finite_slots(*region.ray_intervals(origin, theta))
    return theta, wt, (b - a).sum(axis=1)


_GL_CACHE: dict = {}


def gauss_legendre(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def bbox_of(shapes) -> tuple[float, float, float, float]:
    boxes = [s.bbox() for s in shapes]
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))
