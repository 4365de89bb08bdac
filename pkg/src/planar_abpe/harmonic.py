"""Harmonic measure on disks and concentric annuli, sweeping and mutual singularity.

Boundary measures are kept as densities against arc length sampled at ``n``
equispaced angles ``2*pi*j/n`` on each boundary circle, plus atoms.  The
samples are those of the band-limited density (Fourier modes ``|m| <= n/2``,
the Nyquist mode split evenly), so the trapezoid sum of the samples is the
exact mass and arc masses follow from integrating the trigonometric
interpolant term by term.

Kernels, per unit ``d(theta)/(2*pi)`` and written as Fourier series in the
boundary angle for a point ``z = c + rho * exp(i*phi)``:

* disk of radius ``R``: ``(rho/R)**|m| * exp(-i*m*phi)`` (Poisson kernel);
* annulus ``r < |w - c| < R``: outer circle
  ``sinh(|m| log(rho/r)) / sinh(|m| log(R/r)) * exp(-i*m*phi)``, inner circle
  the same with ``log(R/rho)``; the ``m = 0`` terms are the logarithmic
  masses ``log(rho/r)/log(R/r)`` and ``log(R/rho)/log(R/r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, UnsupportedDomainError
from .measure import ArcDensity, Atom, PlanarMeasure, eval_density
from .shapes import Circle, TWO_PI

__all__ = [
    "CircularDomain",
    "disk_domain",
    "annulus_domain",
    "BoundaryMeasure",
    "harmonic_measure",
    "sweep",
    "mutually_singular",
]

_SAME = 1e-12
_TAIL = 1e-16


# --------------------------------------------------------------------------
# domains

@dataclass(frozen=True)
class CircularDomain:
    """Open domain inside ``outer`` and outside every circle of ``inner``."""

    outer: Circle
    inner: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "inner", tuple(self.inner))
        for c in self.inner:
            if abs(c.center - self.outer.center) + c.radius >= self.outer.radius:
                raise InvalidInputError("inner circles must lie inside the outer circle")
        for a in range(len(self.inner)):
            for b in range(a + 1, len(self.inner)):
                p, q = self.inner[a], self.inner[b]
                if abs(p.center - q.center) <= p.radius + q.radius:
                    raise InvalidInputError("inner circles must be pairwise disjoint")

    @property
    def circles(self) -> tuple:
        return (self.outer,) + self.inner

    @property
    def connectivity(self) -> int:
        return 1 + len(self.inner)

    def boundary_distance(self, z):
        z = np.asarray(z, dtype=complex)
        return np.min([c.distance(z) for c in self.circles], axis=0)

    def contains(self, z):
        """Open domain membership."""
        z = np.asarray(z, dtype=complex)
        ok = np.abs(z - self.outer.center) < self.outer.radius
        for c in self.inner:
            ok &= np.abs(z - c.center) > c.radius
        return ok

    def _kind(self):
        if not self.inner:
            return "disk"
        if len(self.inner) == 1:
            if abs(self.inner[0].center - self.outer.center) > _SAME * self.outer.radius:
                raise UnsupportedDomainError("annulus with a non-concentric hole is not supported")
            return "annulus"
        raise UnsupportedDomainError(
            f"domains of connectivity {self.connectivity} are not supported (disk and annulus only)")


def disk_domain(center=0j, radius=1.0) -> CircularDomain:
    return CircularDomain(Circle(complex(center), float(radius)))


def annulus_domain(center=0j, inner=0.5, outer=1.0) -> CircularDomain:
    c = complex(center)
    return CircularDomain(Circle(c, float(outer)), (Circle(c, float(inner)),))


# --------------------------------------------------------------------------
# boundary measures

def _same_circle(a: Circle, b: Circle) -> bool:
    scale = max(a.radius, b.radius)
    return abs(a.center - b.center) <= _SAME * scale and abs(a.radius - b.radius) <= _SAME * scale


@dataclass(frozen=True)
class BoundaryMeasure:
    """Densities against arc length on circles plus point masses.

    ``densities[c][j]`` is the density at ``circles[c].point(2*pi*j/n)``.
    """

    circles: tuple
    densities: tuple
    atoms: tuple = ()
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "circles", tuple(self.circles))
        dens = tuple(np.asarray(d, dtype=complex) for d in self.densities)
        if len(dens) != len(self.circles):
            raise InvalidInputError("one density array per circle is required")
        sizes = {len(d) for d in dens}
        if len(sizes) > 1:
            raise InvalidInputError("all circles must share one sample count")
        object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "atoms", tuple((complex(p), complex(m)) for p, m in self.atoms))
        object.__setattr__(self, "n", sizes.pop() if sizes else 0)

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    def circle_mass(self, index: int) -> complex:
        c = self.circles[index]
        return complex(np.sum(self.densities[index]) * c.radius * TWO_PI / self.n)

    def atom_mass(self) -> complex:
        return complex(sum(m for _, m in self.atoms))

    def total_mass(self) -> complex:
        return sum((self.circle_mass(t) for t in range(len(self.circles))), 0j) + self.atom_mass()

    def variation(self) -> float:
        out = sum(abs(m) for _, m in self.atoms)
        for c, d in zip(self.circles, self.densities):
            out += float(np.sum(np.abs(d)) * c.radius * TWO_PI / self.n)
        return out

    def arc_mass(self, index: int, t0: float, t1: float) -> complex:
        """Mass of the arc of angles ``[t0, t1]`` on one circle (atoms on it included)."""
        c = self.circles[index]
        m, coef = _interpolant_modes(self.densities[index])
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(m == 0, t1 - t0,
                             (np.exp(1j * m * t1) - np.exp(1j * m * t0)) / (1j * m))
        out = complex(np.sum(coef * terms)) * c.radius
        for p, mass in self.atoms:
            if abs(abs(p - c.center) - c.radius) <= _SAME * c.radius:
                t = np.angle(p - c.center)
                t = t0 + (t - t0) % TWO_PI
                if t <= t1:
                    out += mass
        return out

    def density_at(self, index: int, theta) -> np.ndarray:
        """Trigonometric interpolant of the density at arbitrary angles."""
        m, coef = _interpolant_modes(self.densities[index])
        theta = np.asarray(theta, dtype=float)
        return (np.exp(1j * np.multiply.outer(theta, m)) * coef).sum(axis=-1)

    def integrate(self, f) -> complex:
        """``int f d(nu)`` with the trapezoid rule on each circle."""
        out = 0j
        t = self.angles
        for c, d in zip(self.circles, self.densities):
            vals = np.asarray(f(c.point(t)), dtype=complex)
            out += complex(np.sum(vals * d)) * c.radius * TWO_PI / self.n
        for p, m in self.atoms:
            out += complex(np.asarray(f(np.array([p])), dtype=complex)[0]) * m
        return out

    def scaled(self, s: complex) -> "BoundaryMeasure":
        return BoundaryMeasure(self.circles, [d * s for d in self.densities],
                               [(p, m * s) for p, m in self.atoms])

    def __add__(self, other: "BoundaryMeasure") -> "BoundaryMeasure":
        if self.n != other.n or len(self.circles) != len(other.circles) or not all(
                _same_circle(a, b) for a, b in zip(self.circles, other.circles)):
            raise InvalidInputError("boundary measures live on different circles or samplings")
        return BoundaryMeasure(self.circles,
                               [a + b for a, b in zip(self.densities, other.densities)],
                               self.atoms + other.atoms)


def _interpolant_modes(samples):
    """Mode numbers and coefficients of the trigonometric interpolant of equispaced samples.

    ``samples[j] = sum_m c_m exp(2*pi*i*m*j/n)``; for even ``n`` the Nyquist
    coefficient is split evenly between ``m = n/2`` and ``m = -n/2`` so the
    interpolant is real for real samples.
    """
    n = len(samples)
    c = np.fft.fft(samples) / n
    m = np.round(np.fft.fftfreq(n, 1.0 / n)).astype(np.int64)
    if n % 2 == 0:
        c = np.append(c, c[n // 2] / 2)
        c[n // 2] /= 2
        m = np.append(m, n // 2)
    return m, c


def _samples_from_modes(coef, n):
    """Samples at ``2*pi*j/n`` of ``sum coef[m] exp(i m theta)`` for ``m`` in ``[-M, M]``.

    ``coef`` is indexed by ``m + M``.  Modes beyond the band are dropped, the
    two Nyquist modes keep half weight each.
    """
    M = (len(coef) - 1) // 2
    m = np.arange(-M, M + 1)
    keep = np.abs(m) <= n // 2
    c = coef[keep].astype(complex)
    m = m[keep]
    if n % 2 == 0:
        c = np.where(np.abs(m) == n // 2, c / 2, c)
    bins = np.zeros(n, complex)
    np.add.at(bins, m % n, c)
    # sample_j = sum_m c_m exp(2 pi i m j / n) = n * ifft(bins)
    return n * np.fft.ifft(bins)


def _kernel_modes(domain: CircularDomain, z: np.ndarray, w: np.ndarray, M: int):
    """Summed Fourier modes (per ``d theta / 2 pi``) of ``sum_i w_i * omega_{z_i}`` per circle."""
    kind = domain._kind()
    m = np.arange(-M, M + 1)
    am = np.abs(m)
    c = domain.outer.center
    R = domain.outer.radius
    rel = z - c
    rho = np.abs(rel)
    phi = np.angle(rel)
    out = [np.zeros(2 * M + 1, complex) for _ in domain.circles]
    chunk = max(1, 2 ** 22 // (2 * M + 1))
    for s in range(0, len(z), chunk):
        sl = slice(s, s + chunk)
        ph = np.exp(-1j * np.multiply.outer(phi[sl], m))
        if kind == "disk":
            K = np.power.outer(rho[sl] / R, am)
            out[0] += (w[sl, None] * K * ph).sum(axis=0)
        else:
            r = domain.inner[0].radius
            L = math.log(R / r)
            for idx, a in ((0, np.log(rho[sl] / r)), (1, np.log(R / rho[sl]))):
                K = _sinh_ratio(a, am, L)
                out[idx] += (w[sl, None] * K * ph).sum(axis=0)
    return out


def _sinh_ratio(a, am, L):
    """``sinh(|m| a) / sinh(|m| L)`` with the ``m = 0`` limit ``a / L``, overflow free."""
    A = np.multiply.outer(a, am)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        num = -np.expm1(-2 * A)
        den = -np.expm1(-2 * am * L)
        K = np.exp(np.multiply.outer(a - L, am)) * num / den
    return np.where(am[None, :] == 0, (a / L)[:, None], K)


def _modes_needed(domain, z, n):
    """Smallest mode cutoff making the kernel tail negligible for every charge point."""
    c = domain.outer.center
    R = domain.outer.radius
    rho = np.abs(np.asarray(z) - c)
    if domain._kind() == "disk":
        gap = np.min(np.log(R / np.maximum(rho, 1e-300)))
    else:
        r = domain.inner[0].radius
        gap = float(np.min(np.minimum(np.log(rho / r), np.log(R / rho))))
    if gap <= 0:
        return None
    return int(math.ceil(-math.log(_TAIL) / gap))


def _to_measure(domain, modes, n, atoms=()):
    dens = []
    for circle, cm in zip(domain.circles, modes):
        dens.append(_samples_from_modes(cm, n) / (TWO_PI * circle.radius))
    return BoundaryMeasure(domain.circles, dens, atoms)


def harmonic_measure(domain: CircularDomain, z: complex, n: int | None = None) -> BoundaryMeasure:
    """Harmonic measure of ``domain`` evaluated at the interior point ``z``.

    With ``n`` omitted the sample count is the smallest power of two
    (at least 4096) whose band holds the kernel to ``1e-16``.
    """
    domain._kind()
    z = complex(z)
    if not bool(domain.contains(z)):
        raise InvalidInputError(f"{z} is not an interior point of the domain")
    need = _modes_needed(domain, np.array([z]), n)
    if n is None:
        n = 4096
        while n // 2 < need and n < 2 ** 24:
            n *= 2
    M = max(need, n // 2)
    modes = _kernel_modes(domain, np.array([z]), np.array([1.0 + 0j]), M)
    hm = _to_measure(domain, modes, n)
    dens = [d.real.copy() for d in hm.densities]
    return BoundaryMeasure(hm.circles, dens)


# --------------------------------------------------------------------------
# sweep

def sweep(mu: PlanarMeasure, domain: CircularDomain, n: int = 4096, tol: float = 1e-12) -> BoundaryMeasure:
    """Balayage of ``mu`` onto the boundary of ``domain``.

    Mass already on a boundary circle (atoms, and arc densities carried by a
    boundary circle) is kept as is; interior mass is replaced by the
    superposition of harmonic measures at its quadrature nodes.  Support
    outside the closed domain is rejected.
    """
    domain._kind()
    circles = domain.circles
    scale = domain.outer.radius
    dens = [np.zeros(n, complex) for _ in circles]
    atoms = []
    charge_z, charge_w = [], []
    theta = TWO_PI * np.arange(n) / n
    for comp in mu.components:
        if isinstance(comp, Atom):
            p = complex(comp.point)
            if float(domain.boundary_distance(p)) <= tol * scale:
                atoms.append((p, comp.mass))
            elif bool(domain.contains(p)):
                charge_z.append(np.array([p]))
                charge_w.append(np.array([complex(comp.mass)]))
            else:
                raise InvalidInputError(f"atom {comp.label!r} lies outside the closed domain")
            continue
        if isinstance(comp, ArcDensity) and isinstance(comp.curve, Circle):
            hit = [t for t, c in enumerate(circles) if _same_circle(c, comp.curve)]
            if hit:
                t = hit[0]
                pts = circles[t].point(theta)
                vals = eval_density(comp.density, pts)
                if comp.pieces is not None:
                    inside = np.zeros(n, dtype=bool)
                    for lo, hi in comp.pieces:
                        inside |= ((theta - lo) % TWO_PI) <= (hi - lo)
                    vals = np.where(inside, vals, 0)
                dens[t] += vals
                continue
        pts, w = comp.rule(mu.m)
        if not len(pts):
            continue
        on_boundary = domain.boundary_distance(pts) <= tol * scale
        outside = ~domain.contains(pts) & ~on_boundary
        if np.any(outside):
            raise InvalidInputError(f"component {comp.label!r} has support outside the closed domain")
        if np.any(on_boundary):
            raise InvalidInputError(
                f"component {comp.label!r} meets the boundary away from a boundary circle measure")
        charge_z.append(pts)
        charge_w.append(np.asarray(w, dtype=complex))
    out = BoundaryMeasure(circles, dens, atoms)
    if charge_z:
        z = np.concatenate(charge_z)
        w = np.concatenate(charge_w)
        M = n // 2
        modes = _kernel_modes(domain, z, w, M)
        out = out + _to_measure(domain, modes, n)
    return out


# --------------------------------------------------------------------------
# mutual singularity

@dataclass(frozen=True)
class SingularityVerdict:
    singular: bool
    overlap: float
    relative_overlap: float

    def __bool__(self):
        return self.singular


def _resample(d, n):
    if len(d) == n:
        return d
    m, coef = _interpolant_modes(d)
    t = TWO_PI * np.arange(n) / n
    return (np.exp(1j * np.multiply.outer(t, m)) * coef).sum(axis=-1)


def _overlap(a: BoundaryMeasure, b: BoundaryMeasure, sa=1.0, sb=1.0) -> float:
    total = 0.0
    for ca, da in zip(a.circles, a.densities):
        for cb, db in zip(b.circles, b.densities):
            if _same_circle(ca, cb):
                n = max(len(da), len(db))
                x = np.abs(_resample(da, n)) * sa
                y = np.abs(_resample(db, n)) * sb
                total += float(np.sum(np.minimum(x, y)) * ca.radius * TWO_PI / n)
    for pa, ma in a.atoms:
        for pb, mb in b.atoms:
            if abs(pa - pb) <= _SAME * max(1.0, abs(pa)):
                total += min(abs(ma) * sa, abs(mb) * sb)
    return total


def mutually_singular(nu1: BoundaryMeasure, nu2: BoundaryMeasure, tol: float = 1e-3) -> SingularityVerdict:
    """Whether two boundary measures are mutually singular at sampling resolution.

    ``overlap`` is the sum over shared circles of ``int min(|d1|, |d2|) ds``
    plus the smaller mass of each shared atom.  The verdict compares the
    overlap of the two normalized measures with ``tol`` (equivalently the raw
    overlap with ``tol`` times the smaller mass when the masses agree), which
    makes it independent of positive rescaling of either argument.
    """
    m1, m2 = nu1.variation(), nu2.variation()
    raw = _overlap(nu1, nu2)
    if m1 == 0 or m2 == 0:
        return SingularityVerdict(True, raw, 0.0)
    rel = _overlap(nu1, nu2, 1.0 / m1, 1.0 / m2)
    return SingularityVerdict(rel <= tol, raw, rel)
