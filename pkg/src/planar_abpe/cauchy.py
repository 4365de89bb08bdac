"""Cauchy transforms, coefficients at infinity, Vitushkin covers and localization.

Conventions: the Cauchy transform of ``mu`` is ``int dmu(w) / (w - z)``;
``dbar = (d/dx + i d/dy) / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DiagnosticError, InvalidInputError, ResolutionError, SingularityError
from .measure import ArcDensity, Atom, AreaDensity, PlanarMeasure, eval_density
from .shapes import Circle, Rectangle, TWO_PI, gauss_legendre, polar_lengths, polar_rule

# trapezoid/Gauss errors on analytic integrands decay like rho**-n; 36/ln(rho)
# nodes push that below 1e-15
_DIGITS = 36.0
_MAX_NODES = 2 ** 17
_CHUNK = 2 ** 21


# --------------------------------------------------------------------------
# Cauchy transform

def _kernel_sum(nodes, weights, z):
    out = np.empty(z.shape, complex)
    step = max(1, _CHUNK // max(len(nodes), 1))
    for s in range(0, len(z), step):
        zz = z[s:s + step]
        out[s:s + step] = (weights[None, :] / (nodes[None, :] - zz[:, None])).sum(axis=1)
    return out


def _bernstein_rho(u):
    r = np.sqrt(u - 1) * np.sqrt(u + 1)
    return np.maximum(np.abs(u + r), np.abs(u - r))


def _arc_transform(comp: ArcDensity, m: int, z: np.ndarray) -> np.ndarray:
    curve = comp.curve
    dist = comp.distance(z)
    scale = curve.radius if isinstance(curve, Circle) else curve.length
    if np.any(dist <= 1e-14 * scale):
        if comp.pieces is None or _on_pieces(comp, z[dist <= 1e-14 * scale]):
            raise SingularityError("Cauchy transform evaluated on the support of a line measure")
    out = np.zeros(z.shape, complex)
    if comp.pieces is None and isinstance(curve, Circle):
        rho = np.abs(z - curve.center) / curve.radius
        with np.errstate(divide="ignore"):
            need = np.ceil(_DIGITS / np.abs(np.log(rho))) + 8
        base = 4 * m
        nodes, w = comp.rule(m)
        far = need <= base
        out[far] = _kernel_sum(nodes, w, z[far])
        if np.any(~far):
            sizes = np.minimum(2 ** np.ceil(np.log2(need[~far])), _MAX_NODES).astype(int)
            idx = np.nonzero(~far)[0]
            for n in np.unique(sizes):
                sel = idx[sizes == n]
                nodes, w = comp.rule(m, n=int(n))
                out[sel] = _kernel_sum(nodes, w, z[sel])
            # beyond the node cap: subtract the density at the nearest circle
            # point; its transform is -2 pi R g / (z - c) outside, 0 inside
            capped = idx[need[~far] > _MAX_NODES]
            if len(capped):
                nodes, w = comp.rule(m, n=_MAX_NODES)
                ds = np.full(len(nodes), TWO_PI * curve.radius / _MAX_NODES)
                g = w / ds
                for t in capped:
                    zt = z[t]
                    near_pt = curve.center + curve.radius * np.exp(1j * np.angle(zt - curve.center))
                    g0 = eval_density(comp.density, np.array([near_pt]))[0]
                    val = np.sum((g - g0) * ds / (nodes - zt))
                    if abs(zt - curve.center) > curve.radius:
                        val += -TWO_PI * curve.radius * g0 / (zt - curve.center)
                    out[t] = val
        return out
    pieces = comp.pieces if comp.pieces is not None else ((0.0, 1.0),)
    full = TWO_PI if isinstance(curve, Circle) else 1.0
    for lo, hi in pieces:
        n0 = max(16, int(math.ceil(2 * m * (hi - lo) / full)))
        rho = _piece_rho(curve, lo, hi, z)
        need = np.ceil(_DIGITS / (2 * np.log(np.maximum(rho, 1 + 1e-300)))) + 4
        far = need <= n0
        nodes, w = comp._piece_rule(lo, hi, n0)
        w = w * eval_density(comp.density, nodes)
        out[far] += _kernel_sum(nodes, w, z[far])
        for t in np.nonzero(~far)[0]:
            out[t] += _adaptive_piece(comp, lo, hi, z[t])
    return out


def _on_pieces(comp, pts):
    for p in pts:
        t = comp.curve.param_of(p)
        for lo, hi in comp.pieces:
            if lo <= t <= hi or lo <= t + TWO_PI <= hi:
                return True
    return False


def _piece_rho(curve, lo, hi, z):
    if isinstance(curve, Circle):
        rel = (z - curve.center) / curve.radius
        theta = np.angle(rel)
        mid = (lo + hi) / 2
        theta = theta + TWO_PI * np.round((mid - theta) / TWO_PI)
        tz = theta - 1j * np.log(np.abs(rel))
    else:
        tz = (z - curve.a) / (curve.b - curve.a)
    u = 2 * (tz - lo) / (hi - lo) - 1
    return _bernstein_rho(u)


def _adaptive_piece(comp, lo, hi, z0, depth=0):
    n = 32
    rho = _piece_rho(comp.curve, lo, hi, np.array([z0]))[0]
    need = _DIGITS / (2 * math.log(max(rho, 1 + 1e-300))) + 4
    if need <= n or depth > 40:
        nodes, w = comp._piece_rule(lo, hi, n)
        w = w * eval_density(comp.density, nodes)
        return complex(np.sum(w / (nodes - z0)))
    mid = (lo + hi) / 2
    return _adaptive_piece(comp, lo, mid, z0, depth + 1) + _adaptive_piece(comp, mid, hi, z0, depth + 1)


def _area_transform(comp: AreaDensity, m: int, z: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape, complex)
    near = comp.distance(z) < 3 * comp.spacing(m)
    nodes, w = comp.rule(m)
    out[~near] = _kernel_sum(nodes, w, z[~near])
    region = comp.region
    constant = not callable(comp.density)
    for t in np.nonzero(near)[0]:
        zt = complex(z[t])
        if constant:
            theta, wt, chord = polar_lengths(zt, region, n_theta=4 * m)
            out[t] = complex(comp.density) * np.sum(wt * np.exp(-1j * theta) * chord)
        else:
            pr = polar_rule(zt, region, n_theta=4 * m, n_radial=max(8, m // 2))
            g = eval_density(comp.density, pr.points)
            out[t] = np.sum(pr.base * np.exp(-1j * pr.theta) * g)
    return out


def cauchy_transform(mu: PlanarMeasure, z):
    """Cauchy transform ``int dmu(w)/(w - z)`` at a point or an array of points.

    Line measures are refined per target so the periodic/Gauss rules stay
    converged close to the curve; area components switch to a polar rule
    centred at the target when it is within three node spacings of the shape,
    which cancels the ``1/r`` singularity against the Jacobian.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    out = np.zeros(zz.shape, complex)
    for comp in mu.components:
        if isinstance(comp, Atom):
            if np.any(zz == comp.point):
                raise SingularityError(f"Cauchy transform evaluated on the atom {comp.label!r}")
            out += comp.mass / (comp.point - zz)
        elif isinstance(comp, ArcDensity):
            out += _arc_transform(comp, mu.m, zz)
        else:
            out += _area_transform(comp, mu.m, zz)
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


def dbar_fd(f: Callable, z, h: float):
    """Central-difference dbar of ``f`` with step ``h`` and a Richardson error estimate."""
    z = np.asarray(z, dtype=complex)

    def d(step):
        fx = (f(z + step) - f(z - step)) / (2 * step)
        fy = (f(z + 1j * step) - f(z - 1j * step)) / (2 * step)
        return (fx + 1j * fy) / 2

    d1, d2 = d(h), d(2 * h)
    fmax = np.abs(f(z))
    estimate = np.abs(d2 - d1) / 3 + 1e-14 * np.maximum(fmax, 1.0) / h
    return d1, estimate


# --------------------------------------------------------------------------
# coefficients at infinity

@dataclass(frozen=True)
class CoefficientsAtInfinity:
    value_at_infinity: complex
    a1: complex
    a2: complex
    z0: complex
    residual: float
    coefficients: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def derivative(self) -> complex:
        return self.a1

    @property
    def beta(self) -> complex:
        return self.a2


def coefficients_at_infinity(f, z0, R, n=128, tol=1e-6) -> CoefficientsAtInfinity:
    """Expansion ``f = sum a_j (z - z0)**-j`` read off from samples on ``|z - z0| = R``.

    ``f`` is a vectorized callable or an array of ``n`` samples at the angles
    ``2*pi*j/n``.  ``residual`` is the largest coefficient magnitude in the top
    quarter of the spectrum, relative to the largest one.
    """
    z0 = complex(z0)
    if callable(f):
        if n < 64:
            raise InvalidInputError("at least 64 circle samples are required")
        theta = TWO_PI * np.arange(n) / n
        samples = np.asarray(f(z0 + R * np.exp(1j * theta)), dtype=complex)
    else:
        samples = np.asarray(f, dtype=complex)
        n = len(samples)
        if n < 64:
            raise InvalidInputError("at least 64 circle samples are required")
    if not np.all(np.isfinite(samples)):
        raise DiagnosticError("non-finite samples on the expansion circle")
    F = np.fft.fft(samples) / n
    half = n // 2
    neg = np.array([F[(-j) % n] for j in range(half)])
    pos = F[1:half]
    scale = max(np.max(np.abs(F)), 1e-300)
    q = max(half // 4, 1)
    tail = max(np.max(np.abs(neg[-q:])), np.max(np.abs(pos[-q:]))) / scale
    pos_mass = np.max(np.abs(pos)) / scale if len(pos) else 0.0
    if pos_mass > tol or tail > tol:
        raise DiagnosticError(
            f"spectrum does not decay (positive modes {pos_mass:.2e}, tail {tail:.2e}); "
            "f is not analytic outside the sampling circle")
    coeffs = neg * R ** np.arange(half)
    return CoefficientsAtInfinity(complex(coeffs[0]), complex(coeffs[1]), complex(coeffs[2]),
                                  z0, float(tail), coeffs)


def sup_norm_on_circle(f, a, r, n=4096) -> float:
    """Max of ``|f|`` on ``|z - a| = r``: dense sampling polished by a bounded 1-D search."""
    theta = TWO_PI * np.arange(n) / n
    vals = np.abs(f(a + r * np.exp(1j * theta)))
    j = int(np.argmax(vals))
    h = TWO_PI / n
    res = minimize_scalar(lambda t: -abs(complex(f(np.array([a + r * np.exp(1j * t)]))[0])),
                          bounds=(theta[j] - h, theta[j] + h), method="bounded",
                          options={"xatol": 1e-13})
    return float(max(vals[j], -res.fun))


@dataclass(frozen=True)
class ElementaryCheck:
    derivative: complex
    beta: complex
    sup_norm: float
    delta: float

    def violations(self, slack=1e-8):
        bad = []
        if abs(self.derivative) > self.delta * self.sup_norm + slack:
            bad.append("derivative")
        if abs(self.beta) > self.delta ** 2 * self.sup_norm + slack:
            bad.append("beta")
        return bad


def elementary_check(f, a, delta, n=256) -> ElementaryCheck:
    """|f'(inf)| and |beta(f, a)| against ``delta * sup`` for f analytic off ``B(a, delta)``.

    The sup over the complement of the disk is attained on its boundary
    circle; coefficients come from a circle of radius ``2 delta``.
    """
    co = coefficients_at_infinity(f, a, 2 * delta, n=n)
    sup = sup_norm_on_circle(f, a, delta)
    return ElementaryCheck(co.a1, co.a2, sup, float(delta))


# --------------------------------------------------------------------------
# Vitushkin cover

def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3 - 2 * t)


def _smoothstep_d(t):
    inside = (t > 0) & (t < 1)
    return np.where(inside, 6 * t * (1 - t), 0.0)


def _bump(u, i):
    """1-D partition member on [i - 1/8, i + 9/8] in lattice units, and its u-derivative."""
    t1 = 4 * (u - i) + 0.5
    t2 = 4 * (u - i - 1) + 0.5
    return _smoothstep(t1) - _smoothstep(t2), 4 * (_smoothstep_d(t1) - _smoothstep_d(t2))


@dataclass(frozen=True)
class PartitionFunction:
    """Tensor-product C^1 bump subordinate to the enlarged square ``F_l``."""

    k: int
    i: int
    j: int

    @property
    def h(self) -> float:
        return math.ldexp(1.0, -self.k)

    @property
    def center(self) -> complex:
        return complex((self.i + 0.5) * self.h, (self.j + 0.5) * self.h)

    @property
    def support(self) -> Rectangle:
        h = self.h
        return Rectangle(complex((self.i - 0.125) * h, (self.j - 0.125) * h),
                         complex((self.i + 1.125) * h, (self.j + 1.125) * h))

    def _parts(self, z):
        z = np.asarray(z, dtype=complex)
        u, v = z.real / self.h, z.imag / self.h
        px, dpx = _bump(u, self.i)
        py, dpy = _bump(v, self.j)
        return px, dpx / self.h, py, dpy / self.h

    def __call__(self, z):
        px, _, py, _ = self._parts(z)
        return px * py

    def grad(self, z):
        px, dpx, py, dpy = self._parts(z)
        return dpx * py, px * dpy

    def dbar(self, z):
        gx, gy = self.grad(z)
        return (gx + 1j * gy) / 2

    def panels(self):
        """Sub-rectangles of the support on which ``dbar`` is polynomial."""
        h = self.h
        xs = [(self.i + t) * h for t in (-0.125, 0.125, 0.875, 1.125)]
        ys = [(self.j + t) * h for t in (-0.125, 0.125, 0.875, 1.125)]
        return [Rectangle(complex(xs[a], ys[b]), complex(xs[a + 1], ys[b + 1]))
                for a in range(3) for b in range(3)]


@dataclass(frozen=True)
class VitushkinCover:
    k: int
    window: tuple
    indices: tuple

    @property
    def side(self) -> float:
        return 1.25 * math.ldexp(1.0, -self.k)

    @property
    def gradient_bound(self) -> float:
        return 100.0 * 2.0 ** self.k

    @property
    def members(self) -> list[PartitionFunction]:
        return [PartitionFunction(self.k, i, j) for i, j in self.indices]

    @property
    def centers(self) -> np.ndarray:
        h = math.ldexp(1.0, -self.k)
        idx = np.array(self.indices, dtype=float)
        return (idx[:, 0] + 0.5) * h + 1j * (idx[:, 1] + 0.5) * h

    def partition_sum(self, z):
        z = np.asarray(z, dtype=complex)
        return sum(p(z) for p in self.members)

    def max_gradient(self, samples_per_member=64, seed=0) -> float:
        rng = np.random.default_rng(seed)
        best = 0.0
        for p in self.members:
            s = p.support
            d = s.hi - s.lo
            z = s.lo + rng.random(samples_per_member) * d.real + 1j * rng.random(samples_per_member) * d.imag
            gx, gy = p.grad(z)
            best = max(best, float(np.max(np.hypot(gx, gy))))
        return best

    def interior(self) -> tuple:
        """Window shrunk by one square: where the partition identity is guaranteed."""
        h = math.ldexp(1.0, -self.k)
        x0, y0, x1, y1 = self.window
        return x0 + h, y0 + h, x1 - h, y1 - h

    def distance_to_union(self, z):
        z = np.asarray(z, dtype=complex)
        best = np.full(z.shape, np.inf)
        for p in self.members:
            best = np.minimum(best, p.support.distance(z))
        return best


def build_cover(k: int, window) -> VitushkinCover:
    """Regular Vitushkin cover of generation ``k`` for a rectangular window.

    Every square whose enlarged copy meets the window is included, so the
    partition of unity sums to one on the window shrunk by one square.
    """
    x0, y0, x1, y1 = map(float, window)
    if not (x0 < x1 and y0 < y1):
        raise InvalidInputError("window must be a non-empty rectangle")
    s = 2.0 ** k
    i0, i1 = math.floor(x0 * s) - 1, math.ceil(x1 * s)
    j0, j1 = math.floor(y0 * s) - 1, math.ceil(y1 * s)
    idx = tuple((i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1))
    return VitushkinCover(k, (x0, y0, x1, y1), idx)


def covering_sum_ratio(cover: VitushkinCover, z):
    """``sum_l min(1, 2^{-3k}/|z - z_l|^3) / min(1, 2^{-k}/dist(z, U F_l))`` at each z."""
    z = np.asarray(z, dtype=complex)
    h = math.ldexp(1.0, -cover.k)
    zl = cover.centers
    d = np.abs(z[:, None] - zl[None, :])
    with np.errstate(divide="ignore"):
        lhs = np.minimum(1.0, h ** 3 / d ** 3).sum(axis=1)
        dist = cover.distance_to_union(z)
        rhs = np.minimum(1.0, h / dist)
    return lhs / rhs


# --------------------------------------------------------------------------
# localization operator

@dataclass
class LocalizedFunction:
    """``T_phi f``: analytic off the support of ``phi`` and zero at infinity."""

    f: Callable
    phi: PartitionFunction
    n: int
    bound: float
    _cache: dict = field(default_factory=dict, repr=False)

    def _far_nodes(self):
        if "far" not in self._cache:
            pts, w = [], []
            x, wx = gauss_legendre(self.n)
            for panel in self.phi.panels():
                d = panel.hi - panel.lo
                xs = panel.lo.real + d.real * (x + 1) / 2
                ys = panel.lo.imag + d.imag * (x + 1) / 2
                X, Y = np.meshgrid(xs, ys, indexing="ij")
                pts.append((X + 1j * Y).ravel())
                w.append(np.outer(wx * d.real / 2, wx * d.imag / 2).ravel())
            pts = np.concatenate(pts)
            w = np.concatenate(w) * self.phi.dbar(pts)
            self._cache["far"] = (pts, w, np.asarray(self.f(pts), dtype=complex))
        return self._cache["far"]

    def __call__(self, zeta):
        scalar = np.ndim(zeta) == 0
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex)).ravel()
        fz = np.asarray(self.f(zeta), dtype=complex)
        pts, w, fp = self._far_nodes()
        panels = self.phi.panels()
        psize = max(max((p.hi - p.lo).real, (p.hi - p.lo).imag) for p in panels)
        per = self.n * self.n
        # targets within one panel width of a panel get a polar rule centred on them
        near = np.stack([p.distance(zeta) < psize for p in panels], axis=1)
        node_near = np.repeat(near, per, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = (fp[None, :] - fz[:, None]) / (pts[None, :] - zeta[:, None]) * w[None, :]
        out = np.where(node_near, 0, terms).sum(axis=1)
        for t, q in zip(*np.nonzero(near)):
            pr = polar_rule(complex(zeta[t]), panels[q], n_theta=4 * self.n, n_radial=self.n)
            diff = np.asarray(self.f(pr.points), dtype=complex) - fz[t]
            out[t] += np.sum(diff * np.exp(-1j * pr.theta) * pr.base * self.phi.dbar(pr.points))
        out = out / math.pi
        return complex(out[0]) if scalar else out

    @property
    def sup_estimate(self) -> float:
        """Sampled max of ``|T_phi f|`` on the boundary of the support.

        By the maximum principle this bounds the function outside the support.
        """
        if "sup" not in self._cache:
            c = self.phi.support.corners()
            ring = np.concatenate([np.linspace(c[t], c[(t + 1) % 4], 8, endpoint=False) for t in range(4)])
            self._cache["sup"] = float(np.max(np.abs(self(ring))))
        return self._cache["sup"]


def localize(f: Callable, phi: PartitionFunction, n: int = 12, check: bool = True,
             resolution_tol: float = 1e-6) -> LocalizedFunction:
    """Vitushkin localization ``(1/pi) iint (f(z) - f(w))/(z - w) dbar(phi)(z) dA(z)``.

    ``bound`` is ``2 * max|grad phi| * diam(supp phi) * osc(f on supp phi)``.
    With ``check`` the result is recomputed at double resolution at probe
    points and a ``ResolutionError`` is raised if the two disagree.
    """
    sup = phi.support
    d = sup.hi - sup.lo
    x = np.linspace(0, 1, 25)
    X, Y = np.meshgrid(x, x, indexing="ij")
    grid = (sup.lo.real + d.real * X + 1j * (sup.lo.imag + d.imag * Y)).ravel()
    fv = np.asarray(f(grid), dtype=complex)
    if not np.all(np.isfinite(fv)):
        raise ResolutionError("f is not finite on the support of phi")
    osc = float(np.max(np.abs(fv[:, None] - fv[None, :])))
    gx, gy = phi.grad(grid)
    gmax = float(np.max(np.hypot(gx, gy)))
    out = LocalizedFunction(f, phi, n, 2 * gmax * abs(d) * osc)
    if check:
        probes = np.array([sup.center, sup.center + 2 * d, sup.lo - 0.5 * d])
        fine = LocalizedFunction(f, phi, 2 * n, out.bound)
        err = float(np.max(np.abs(out(probes) - fine(probes))))
        if err > resolution_tol * max(osc, 1.0):
            raise ResolutionError(
                f"localization not resolved at n={n}: probe change {err:.2e} "
                f"(dbar f varies below the panel resolution)")
    return out
