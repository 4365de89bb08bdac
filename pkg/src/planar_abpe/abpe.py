"""Bounded point evaluations of finite-dimensional function spaces in L^2(mu).

For a nested family of spans ``V_0 < V_1 < ... < V_N`` (polynomials about a
center, optionally with negative powers about poles in the holes of ``K``)
the evaluation bound at ``lam`` is

    b_d(lam) = sup{|f(lam)| : f in V_d, ||f||_{L^2(mu)} <= 1}.

Two independent routes compute it:

* ``arnoldi`` (default): an orthonormal basis ``q_t`` of ``V_N`` in
  ``L^2(mu)`` is built by repeated multiplication (by ``z - c`` for the
  polynomial chain and by ``1/(z - p)`` for each pole chain) with twice
  repeated Gram-Schmidt at the quadrature nodes.  The same recurrence applied
  at ``lam`` gives ``q_t(lam)`` and ``b_d**2 = sum |q_t(lam)|**2``.  A new
  direction whose residual falls below ``1e-12`` of its size is numerically
  zero in ``L^2(mu)``; if it is nonzero at ``lam`` the bound is infinite.
* ``gram``: ``b_d**2 = v^H G^+ v`` with the Gram matrix ``G`` of the basis and
  its evaluation vector ``v`` at ``lam``, pseudo-inverted at relative
  threshold ``1e-12``.

Profiles ``d -> b_d`` are classified over the top third of degrees as
divergent (geometric growth of ``b_d`` with ratio above 1.05), convergent
(the gain of ``b**2`` over the last third of degrees smaller than over the
middle third, or negligible), or undecided.  Close to the boundary
of a region of bounded evaluations the increments of a degree-``N`` profile
still grow, so detected regions fall short of the true ones by a band of
width ``O(1/N)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import DecompositionFailure, InvalidInputError, NoKernelError, UnsupportedExponentError
from .harmonic import CircularDomain, sweep
from .measure import Atom, ArcDensity, PlanarMeasure, restrict
from .shapes import Annulus, Circle, Disk, Rectangle, Region

__all__ = [
    "FunctionBasis",
    "GramResult",
    "gram_matrix",
    "EvaluationProfile",
    "evaluation_bound",
    "ScanComponent",
    "ScanResult",
    "scan_abpe",
    "kernel_function",
    "DensityVerdict",
    "density_test",
    "Decomposition",
    "decompose",
    "default_basis",
]

_CROSS = ndimage.generate_binary_structure(2, 1)
_FULL = ndimage.generate_binary_structure(2, 2)
DROP_TOL = 1e-12
GROWTH_RATIO = 1.05
NEGLIGIBLE = 1e-10


# --------------------------------------------------------------------------
# bases and Gram matrices

@dataclass(frozen=True)
class FunctionBasis:
    """Monomials ``(z - c)**j`` and negative powers ``(z - p)**-j``, ``1 <= j <= degree``.

    Members are ordered by degree: the constant, then for each degree ``j``
    the monomial followed by one negative power per pole.  ``V_d`` is the
    span of all members of degree ``<= d``.
    """

    center: complex = 0j
    degree: int = 10
    poles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))
        if self.degree < 0:
            raise InvalidInputError("degree must be nonnegative")

    @property
    def members(self) -> list:
        """``(kind, power, anchor)`` triples: kind ``"mono"`` or ``"pole"``."""
        out = [("mono", 0, self.center)]
        for j in range(1, self.degree + 1):
            out.append(("mono", j, self.center))
            out.extend(("pole", j, p) for p in self.poles)
        return out

    def size(self, degree: int | None = None) -> int:
        d = self.degree if degree is None else degree
        return 1 + d * (1 + len(self.poles))

    def degrees(self) -> np.ndarray:
        return np.array([m[1] for m in self.members])

    def truncated(self, degree: int) -> "FunctionBasis":
        return FunctionBasis(self.center, degree, self.poles)

    def evaluate(self, z) -> np.ndarray:
        """Matrix ``B[k, i] = b_i(z_k)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        cols = []
        for kind, j, p in self.members:
            cols.append((z - p) ** j if kind == "mono" else (z - p) ** (-float(j)))
        return np.stack(cols, axis=1)


def default_basis(mu: PlanarMeasure, degree: int = 30, holes: Sequence[complex] = ()) -> FunctionBasis:
    x0, y0, x1, y1 = mu.bbox()
    return FunctionBasis(complex((x0 + x1) / 2, (y0 + y1) / 2), degree, tuple(holes))


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    condition: float
    ill_conditioned: bool
    threshold: float = DROP_TOL


def _weights(mu: PlanarMeasure):
    pts, w = mu.nodes()
    return pts, np.abs(w)


def gram_matrix(basis: FunctionBasis, mu: PlanarMeasure, threshold: float = DROP_TOL) -> GramResult:
    """``G[i, j] = int b_i conj(b_j) d|mu|`` with a conditioning diagnostic."""
    pts, w = _weights(mu)
    B = basis.evaluate(pts)
    G = (B * w[:, None]).T @ B.conj()
    G = (G + G.conj().T) / 2
    ev = np.linalg.eigvalsh(G)
    top = float(ev[-1]) if len(ev) else 0.0
    low = float(max(ev[0], 0.0)) if len(ev) else 0.0
    cond = math.inf if low <= 0 else top / low
    return GramResult(G, cond, bool(cond > 1.0 / threshold))


# --------------------------------------------------------------------------
# orthonormalization

@dataclass
class _Orthonormal:
    """Arnoldi-type recurrence for an orthonormal basis of the nested spans."""

    basis: FunctionBasis
    steps: list          # (kind, anchor, scale, source, coeffs, norm) per member
    degrees: np.ndarray
    kept: np.ndarray
    Q: np.ndarray        # weighted node values of kept vectors (columns)

    @classmethod
    def build(cls, basis: FunctionBasis, mu: PlanarMeasure, tol: float = DROP_TOL):
        pts, w = _weights(mu)
        sw = np.sqrt(w)
        members = basis.members
        n = len(members)
        X = np.zeros((len(pts), n), complex)
        kept = np.zeros(n, dtype=bool)
        steps = []
        last = {}
        mono_scale = float(np.max(np.abs(pts - basis.center))) if len(pts) else 1.0
        mono_scale = mono_scale if mono_scale > 0 else 1.0
        total = math.sqrt(float(np.sum(w)))
        for t, (kind, j, p) in enumerate(members):
            if t == 0:
                raw = sw.astype(complex)
                src, scale = -1, 1.0
            else:
                key = (kind, p)
                src = last.get(key, 0)
                if kind == "mono":
                    scale = mono_scale
                    mult = (pts - p) / scale
                else:
                    d = np.abs(pts - p)
                    if np.any(d == 0):
                        raise InvalidInputError(f"pole {p} lies on the support of the measure")
                    scale = float(np.min(d))
                    mult = scale / (pts - p)
                raw = mult * X[:, src]
            size = float(np.linalg.norm(raw))
            coeffs = np.zeros(t, complex)
            if t:
                Qk = X[:, :t][:, kept[:t]]
                idx = np.nonzero(kept[:t])[0]
                for _ in range(2):
                    h = Qk.conj().T @ raw
                    raw = raw - Qk @ h
                    coeffs[idx] += h
            norm = float(np.linalg.norm(raw))
            ref = size if t else total
            if norm > tol * ref and norm > 0:
                X[:, t] = raw / norm
                kept[t] = True
            else:
                norm = 0.0
            steps.append((kind, p, scale, src, coeffs, norm))
            last[(kind, p) if t else ("mono", basis.center)] = t
            if t == 0:
                for q in basis.poles:
                    last[("pole", q)] = 0
        return cls(basis, steps, basis.degrees(), kept, X[:, kept])

    def values(self, lam: np.ndarray):
        """``(V, bad)``: ``V[:, t] = q_t(lam)`` for kept ``t``; ``bad[:, t]`` marks a
        numerically null direction that is nonzero at ``lam``."""
        lam = np.asarray(lam, dtype=complex)
        n = len(self.steps)
        V = np.zeros((len(lam), n), complex)
        bad = np.zeros((len(lam), n), dtype=bool)
        for t, (kind, p, scale, src, coeffs, norm) in enumerate(self.steps):
            if t == 0:
                val = np.ones(len(lam), complex)
                mag = np.ones(len(lam))
            else:
                if kind == "mono":
                    mult = (lam - p) / scale
                else:
                    with np.errstate(divide="ignore", invalid="ignore"):
                        mult = scale / (lam - p)
                base = mult * V[:, src]
                val = base - V[:, :t] @ coeffs
                mag = np.abs(base) + np.abs(V[:, :t]) @ np.abs(coeffs)
            if t == 0:
                if norm > 0:
                    V[:, 0] = val / norm
            elif norm > 0:
                V[:, t] = val / norm
            else:
                # keep the null direction's value so its chain continues consistently
                V[:, t] = val
                bad[:, t] = ~(np.abs(val) <= 1e-8 * np.maximum(mag, 1e-300))
        return V, bad

    def profile(self, lam):
        V, bad = self.values(lam)
        degs = self.degrees
        N = int(degs.max()) if len(degs) else 0
        contrib = np.where(self.kept[None, :], np.abs(V) ** 2, 0.0)
        out = np.zeros((len(V), N + 1))
        infinite = np.zeros((len(V), N + 1), dtype=bool)
        for d in range(N + 1):
            sel = degs <= d
            out[:, d] = contrib[:, sel].sum(axis=1)
            infinite[:, d] = bad[:, sel].any(axis=1)
        b = np.sqrt(out)
        b[infinite] = np.inf
        return b


def _gram_profile(basis: FunctionBasis, mu: PlanarMeasure, lam: np.ndarray, threshold=DROP_TOL):
    out = np.zeros((len(lam), basis.degree + 1))
    pts, w = _weights(mu)
    x0, y0, x1, y1 = mu.bbox()
    # rescaling members does not change the spans but keeps G representable
    s = max(float(np.max(np.abs(pts - basis.center))), 1e-300)
    full = basis.evaluate(pts)
    vals = basis.evaluate(lam)
    scales = np.array([s ** j if kind == "mono" else
                       (float(np.min(np.abs(pts - p))) ** (-float(j))) for kind, j, p in basis.members])
    full = full / scales
    vals = vals / scales
    for d in range(basis.degree + 1):
        k = basis.size(d)
        B = full[:, :k]
        G = (B * w[:, None]).T @ B.conj()
        G = (G + G.conj().T) / 2
        Gp = np.linalg.pinv(G, rcond=threshold, hermitian=True)
        v = vals[:, :k]
        out[:, d] = np.sqrt(np.maximum(np.einsum("li,ij,lj->l", v.conj(), Gp, v).real, 0))
    return out


@dataclass(frozen=True)
class EvaluationProfile:
    point: complex
    bounds: np.ndarray
    divergent: bool
    convergent: bool
    growth_ratio: float
    increment_ratio: float
    limit: float | None
    method: str = "arnoldi"

    @property
    def degree(self) -> int:
        return len(self.bounds) - 1

    @property
    def value(self) -> float:
        return float(self.bounds[-1])


def _classify(b: np.ndarray):
    """Vectorized profile classification: ``(divergent, convergent, growth, ratio, limit)``.

    With ``k = N // 3``, ``growth`` is the fitted geometric growth rate of
    ``b_d`` over the last ``k`` degrees and ``ratio`` compares the gains of
    ``b**2`` over the last two blocks of ``k`` degrees.  Block gains average
    out the periodic increments produced by supports with several pieces.
    """
    L, n = b.shape
    N = n - 1
    finite = np.isfinite(b[:, -1])
    growth = np.full(L, np.inf)
    ratio = np.full(L, np.inf)
    limit = np.full(L, np.nan)
    if N < 3:
        return ~finite, finite.copy(), growth, ratio, np.where(finite, b[:, -1], np.nan)
    k = N // 3
    d = np.arange(N - k, N + 1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logb = np.log(np.where(finite[:, None], np.maximum(b[:, N - k:], 1e-300), 1.0))
        growth = np.where(finite, np.exp(np.polyfit(d, logb.T, 1)[0]), np.inf)
        b2 = np.where(finite[:, None], b, 0.0) ** 2
        late = b2[:, N] - b2[:, N - k]
        early = b2[:, N - k] - b2[:, N - 2 * k]
        tiny = late <= NEGLIGIBLE * np.maximum(b2[:, N], 1e-300)
        ratio = np.where(tiny, 0.0, late / np.where(early > 0, early, np.nan))
        ratio = np.where(finite, np.nan_to_num(ratio, nan=np.inf), np.inf)
        tail = np.where(ratio < 1, late * ratio / np.maximum(1 - ratio, 1e-300), np.nan)
        limit = np.where(ratio < 1, np.sqrt(b2[:, N] + tail), np.nan)
    divergent = ~finite | (growth > GROWTH_RATIO)
    convergent = finite & ~divergent & (ratio < 1)
    return divergent, convergent, growth, ratio, limit


def _profiles(lam, basis, mu, method="arnoldi"):
    lam = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    if method == "arnoldi":
        return _Orthonormal.build(basis, mu).profile(lam)
    if method == "gram":
        return _gram_profile(basis, mu, lam)
    raise InvalidInputError(f"unknown method {method!r}")


def evaluation_bound(lam: complex, basis: FunctionBasis, mu: PlanarMeasure, q: float = 2,
                     method: str = "arnoldi") -> EvaluationProfile:
    """Profile ``d -> b_d(lam)`` for ``d = 0..basis.degree``."""
    if q != 2:
        raise UnsupportedExponentError("only the L^2 evaluation bound is supported")
    b = _profiles([lam], basis, mu, method)
    div, conv, growth, ratio, limit = _classify(b)
    lim = float(limit[0]) if conv[0] else None
    return EvaluationProfile(complex(lam), b[0], bool(div[0]), bool(conv[0]),
                             float(growth[0]), float(ratio[0]), lim, method)


# --------------------------------------------------------------------------
# scans

@dataclass(frozen=True)
class ScanComponent:
    index: int
    cells: int
    bbox: tuple
    centroid: complex
    connectivity: int


@dataclass
class ScanResult:
    xs: np.ndarray
    ys: np.ndarray
    resolution: float
    values: np.ndarray        # b_N on the grid, indexed [ix, iy]
    convergent: np.ndarray    # raw convergent set
    region: np.ndarray        # grid interior of the convergent set
    labels: np.ndarray
    components: list
    divergent: np.ndarray | None = None   # raw divergent set

    @property
    def points(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return X + 1j * Y

    def component_mask(self, index: int) -> np.ndarray:
        return self.labels == index

    def distance_to_component(self, index: int, z) -> np.ndarray:
        """Distance from points to the closed union of the grid squares of a component."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pts = self.points[self.component_mask(index)]
        h = self.resolution / 2
        out = np.full(len(z), np.inf)
        for s in range(0, len(pts), 4096):
            p = pts[s:s + 4096]
            dx = np.maximum(np.abs(z.real[:, None] - p.real[None, :]) - h, 0)
            dy = np.maximum(np.abs(z.imag[:, None] - p.imag[None, :]) - h, 0)
            out = np.minimum(out, np.hypot(dx, dy).min(axis=1))
        return out


def _connectivity(mask: np.ndarray) -> int:
    padded = np.pad(mask, 1)
    _, pieces = ndimage.label(~padded, structure=_FULL)
    return pieces - 1


def _interior_mask(K, z: np.ndarray) -> np.ndarray:
    """Points in the interior of some shape of ``K`` (segments and curves have none)."""
    out = np.zeros(z.shape, dtype=bool)
    for shape in K:
        if not isinstance(shape, Region):
            continue
        inside = np.asarray(shape.contains(z), dtype=bool)
        edge = np.min([c.distance(z) for c in shape.curves()], axis=0) if shape.curves() else np.inf
        out |= inside & (edge > 1e-12)
    return out


def scan_abpe(mu: PlanarMeasure, basis: FunctionBasis, window=None, resolution: float = 1 / 64,
              method: str = "arnoldi", K=None) -> ScanResult:
    """Grid scan of the points with convergent evaluation profiles.

    When ``K`` (a sequence of shapes) is given the scan is restricted to its
    interior: off ``K`` the rational functions ``1/(z - lam)`` belong to the
    function class, so no evaluation there can be bounded.

    The detected region is the grid interior of the convergent set (points
    whose four grid neighbours are convergent too), so isolated bounded
    evaluations such as those at atoms are discarded; components use
    4-adjacency and ``connectivity`` counts one plus the number of holes.
    """
    if window is None:
        x0, y0, x1, y1 = mu.bbox()
        mx = max(x1 - x0, y1 - y0, 1e-3) * 0.25
        window = (x0 - mx, y0 - mx, x1 + mx, y1 + mx)
    x0, y0, x1, y1 = (float(v) for v in window)
    if not (x1 > x0 and y1 > y0) or resolution <= 0:
        raise InvalidInputError("scan window must be nondegenerate and resolution positive")
    nx = int(math.floor((x1 - x0) / resolution + 1e-9)) + 1
    ny = int(math.floor((y1 - y0) / resolution + 1e-9)) + 1
    if nx * ny > 4_000_000:
        raise InvalidInputError(f"scan grid of {nx}x{ny} points exceeds the 4e6 point limit")
    xs = x0 + resolution * np.arange(nx)
    ys = y0 + resolution * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    lam = (X + 1j * Y).ravel()
    if method == "arnoldi":
        orth = _Orthonormal.build(basis, mu)
        b = np.concatenate([orth.profile(lam[s:s + 20000]) for s in range(0, len(lam), 20000)])
    else:
        b = _profiles(lam, basis, mu, method)
    div, conv, _, _, _ = _classify(b)
    conv = conv.reshape(nx, ny)
    if K is not None:
        conv &= _interior_mask(tuple(K), lam).reshape(nx, ny)
    region = ndimage.binary_erosion(conv, structure=_CROSS, border_value=0)
    labels, n = ndimage.label(region, structure=_CROSS)
    comps = []
    for idx in range(1, n + 1):
        m = labels == idx
        ii, jj = np.nonzero(m)
        pts = lam.reshape(nx, ny)[m]
        comps.append(ScanComponent(idx, int(m.sum()),
                                   (float(xs[ii.min()]), float(ys[jj.min()]),
                                    float(xs[ii.max()]), float(ys[jj.max()])),
                                   complex(pts.mean()), 1 + _connectivity(m[ii.min():ii.max() + 1,
                                                                            jj.min():jj.max() + 1])))
    return ScanResult(xs, ys, resolution, b[:, -1].reshape(nx, ny), conv, region, labels, comps,
                      div.reshape(nx, ny))


# --------------------------------------------------------------------------
# kernel functions

def kernel_function(lam: complex, basis: FunctionBasis, mu: PlanarMeasure,
                    threshold: float = DROP_TOL) -> np.ndarray:
    """Coefficients ``kappa`` of the reproducing kernel ``k_lam = sum kappa_i b_i``.

    ``<f, k_lam> = int f conj(k_lam) d|mu| = f(lam)`` for every basis member
    (up to the pseudo-inverse threshold) and ``||k_lam|| = b_N(lam)``.
    """
    prof = evaluation_bound(lam, basis, mu)
    if prof.divergent:
        raise NoKernelError(f"evaluation at {lam} is unbounded on the basis span (divergent profile)")
    G = gram_matrix(basis, mu, threshold).matrix
    v = basis.evaluate(np.array([lam]))[0]
    return np.conj(np.linalg.pinv(G, rcond=threshold, hermitian=True) @ v)


# --------------------------------------------------------------------------
# density and decomposition

@dataclass(frozen=True)
class DensityVerdict:
    dense: bool
    witness: tuple
    note: str

    def __bool__(self):
        return self.dense


def _holes_of(K) -> list:
    return [s.center for s in (K or ()) if isinstance(s, Annulus)]


def density_test(mu: PlanarMeasure, K=None, basis: FunctionBasis | None = None, window=None,
                 resolution: float = 1 / 32, degree: int = 30) -> DensityVerdict:
    """Whether the basis spans are dense in ``L^2(mu)`` as far as a scan can tell.

    Not dense when the scan finds bounded point evaluations (the components
    are the witness).  A dense verdict only says none were found at the scan
    resolution and degree.
    """
    if basis is None:
        basis = default_basis(mu, degree, _holes_of(K))
    scan = scan_abpe(mu, basis, window, resolution, K=K)
    if scan.components:
        return DensityVerdict(False, tuple(scan.components), "bounded point evaluations detected")
    return DensityVerdict(True, (), f"no bounded point evaluations at resolution {resolution:g}, "
                                    f"degree {basis.degree}")


@dataclass
class Decomposition:
    delta0: tuple
    parts: list               # dicts: labels, component, connectivity, K component, ...
    diagnostics: dict
    scan: ScanResult | None = field(default=None, repr=False)

    def labels(self) -> list:
        out = list(self.delta0)
        for p in self.parts:
            out.extend(p["labels"])
        return out

    def report(self) -> dict:
        return {
            "heuristic": True,
            "delta0": list(self.delta0),
            "parts": [{k: v for k, v in p.items()} for p in self.parts],
            "diagnostics": self.diagnostics,
        }


def _support_samples(comp, m: int) -> np.ndarray:
    if isinstance(comp, Atom):
        return np.array([complex(comp.point)])
    pts, _ = comp.rule(min(m, 16))
    extra = []
    shape = getattr(comp, "shape", None) or getattr(comp, "curve", None)
    if isinstance(shape, (Disk, Circle)):
        t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        extra = shape.center + shape.radius * np.exp(1j * t)
        if comp.clip is not None:
            extra = extra[np.asarray(comp.clip.contains(extra), dtype=bool)]
    elif isinstance(shape, Annulus):
        t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        extra = np.concatenate([shape.center + r * np.exp(1j * t) for r in (shape.inner, shape.outer)])
    elif isinstance(shape, Rectangle):
        extra = np.array(shape.corners())
    elif shape is not None and hasattr(shape, "a"):
        extra = np.array([shape.a, shape.b])
    return np.concatenate([pts, np.asarray(extra, dtype=complex)])


def _k_domain(shape):
    if isinstance(shape, Disk):
        return CircularDomain(Circle(shape.center, shape.radius))
    if isinstance(shape, Annulus):
        return CircularDomain(Circle(shape.center, shape.outer), (Circle(shape.center, shape.inner),))
    return None


def _k_connectivity(shape) -> int:
    return 2 if isinstance(shape, Annulus) else 1


def _near_mask(K, z: np.ndarray, reach: float) -> np.ndarray:
    """Grid points within ``reach`` of the closed set ``K``."""
    out = np.zeros(z.shape, dtype=bool)
    for shape in K:
        out |= np.asarray(shape.distance(z)) <= reach
    return out


def decompose(mu: PlanarMeasure, K: Sequence, basis: FunctionBasis | None = None,
              degree: int = 30, resolution: float = 1 / 32, window=None) -> Decomposition:
    """Split the labelled components of ``mu`` into ``Delta_0`` and abpe parts.

    Stages: (1) scan for bounded point evaluations inside ``K``; (2) a
    component whose closed support meets the closure of a detected region
    ``U_n`` joins ``Delta_n``; (3) every leftover component must be
    individually dense, otherwise ``DecompositionFailure`` is raised with the
    partial report; (4) the connectivity of each ``U_n`` is compared with that
    of the ``K``-interior component holding it; (5) components carried by the
    boundary of that ``K`` component are checked for absolute continuity
    against its harmonic measure (no atoms, finite density after sweeping).

    Closure at scan resolution: a degree-``N`` scan stops short of the true
    boundary by a band where profiles are still undecided.  The closure of
    ``U_n`` is therefore taken as the grid cells of closed ``K`` joined to the
    detected region through cells whose profiles are not divergent; a support
    point lies in it when its grid cell is within one cell of it.  ``max_support_distance`` in the
    report gives the raw distance to the detected region itself.
    """
    K = tuple(K)
    if basis is None:
        basis = default_basis(mu, degree, _holes_of(K))
    h = resolution
    scan = scan_abpe(mu, basis, window, resolution, K=K)
    comps = scan.components
    grid = scan.points
    allowed = _near_mask(K, grid, h / math.sqrt(2)) & ~scan.divergent
    flood, _ = ndimage.label(allowed | scan.region, structure=_CROSS)
    closures = {}
    for comp in comps:
        ids = np.unique(flood[scan.component_mask(comp.index)])
        # a point belongs to the closure of a cell set when it lies within
        # one cell of it, hence the one-cell dilation
        closures[comp.index] = ndimage.binary_dilation(
            np.isin(flood, ids[ids > 0]), structure=np.ones((3, 3), bool))
    assign: dict = {}
    raw_dist: dict = {}
    inside: dict = {}
    x0, y0 = scan.xs[0], scan.ys[0]
    nx, ny = len(scan.xs), len(scan.ys)
    for c in mu.components:
        pts = _support_samples(c, mu.m)
        ix = np.clip(np.round((pts.real - x0) / h).astype(int), 0, nx - 1)
        iy = np.clip(np.round((pts.imag - y0) / h).astype(int), 0, ny - 1)
        best, best_hit = None, 0.0
        for comp in comps:
            hits = closures[comp.index][ix, iy]
            raw_dist[(c.label, comp.index)] = float(scan.distance_to_component(comp.index, pts).max())
            inside[(c.label, comp.index)] = bool(hits.all())
            frac = float(hits.mean())
            if frac > best_hit:
                best, best_hit = comp.index, frac
        assign[c.label] = best
    diagnostics = {
        "resolution": resolution,
        "degree": basis.degree,
        "center": [basis.center.real, basis.center.imag],
        "poles": [[p.real, p.imag] for p in basis.poles],
        "components_found": len(comps),
        "undecided_cells": int(np.sum(~scan.convergent & ~scan.divergent)),
    }
    delta0 = tuple(lbl for lbl, idx in assign.items() if idx is None)
    parts = []
    for comp in comps:
        labels = [lbl for lbl, idx in assign.items() if idx == comp.index]
        cells = grid[scan.component_mask(comp.index)]
        host, best = None, 0
        for shape in K:
            if isinstance(shape, Region):
                count = int(np.sum(shape.contains(cells)))
                if count > best:
                    host, best = shape, count
        k_conn = _k_connectivity(host) if host is not None else None
        parts.append({
            "component": comp.index,
            "labels": labels,
            "cells": comp.cells,
            "bbox": list(comp.bbox),
            "connectivity": comp.connectivity,
            "k_connectivity": k_conn,
            "connectivity_ok": k_conn is not None and comp.connectivity <= k_conn,
            "closure_contains_support": all(inside[(lbl, comp.index)] for lbl in labels),
            "max_support_distance": {lbl: raw_dist[(lbl, comp.index)] for lbl in labels},
            "absolutely_continuous": _boundary_check(mu, labels, host),
        })
    report = Decomposition(delta0, parts, diagnostics, scan)
    failures = []
    for lbl in delta0:
        verdict = density_test(restrict(mu, [lbl]), K, None, window, resolution, basis.degree)
        diagnostics.setdefault("delta0_density", {})[lbl] = verdict.note
        if not verdict.dense:
            failures.append(lbl)
    if failures:
        raise DecompositionFailure(
            f"components {failures} meet no detected region but are not dense on their own",
            report.report())
    return report


def _boundary_check(mu, labels, host):
    """Per label: atom mass on the host boundary and whether the swept part is finite."""
    domain = _k_domain(host) if host is not None else None
    out = {}
    if domain is None:
        return out
    for lbl in labels:
        c = mu.component(lbl)
        on_boundary = isinstance(c, ArcDensity) and isinstance(c.curve, Circle) and any(
            abs(c.curve.center - b.center) < 1e-12 and abs(c.curve.radius - b.radius) < 1e-12
            for b in domain.circles)
        on_boundary |= isinstance(c, Atom) and float(domain.boundary_distance(c.point)) < 1e-12
        if not on_boundary:
            continue
        swept = sweep(restrict(mu, [lbl]), domain, n=1024)
        atom_mass = float(sum(abs(m) for _, m in swept.atoms))
        finite = all(np.all(np.isfinite(d)) for d in swept.densities)
        out[lbl] = {"atom_mass": atom_mass, "absolutely_continuous": bool(atom_mass == 0 and finite)}
    return out
