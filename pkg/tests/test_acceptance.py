"""Acceptance suite: one test per criterion, each printed as PASS/FAIL in the summary.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``scripts/run_acceptance.py``).
"""
import io
import math
import time
from pathlib import Path

import numpy as np
import pytest

from planar_abpe.abpe import FunctionBasis, decompose, evaluation_bound, scan_abpe
from planar_abpe.cauchy import (build_cover, cauchy_transform, covering_sum_ratio, dbar_fd,
                                elementary_check, localize)
from planar_abpe.cli import main
from planar_abpe.coloring import ConstantPhi, run_scheme, vanishing_consistency
from planar_abpe.geometry import DyadicSquare
from planar_abpe.harmonic import (BoundaryMeasure, annulus_domain, disk_domain, harmonic_measure,
                                  mutually_singular, sweep)
from planar_abpe.measure import (annulus_measure, atom, circle_measure, disk_measure, measure,
                                 segment_measure)
from planar_abpe.scene import load_scene
from planar_abpe.shapes import Annulus, Circle, Disk, Rectangle, Segment

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _ring_points(rng, n, r0, r1, center=0j):
    r = r0 + (r1 - r0) * rng.random(n)
    return center + r * np.exp(2j * np.pi * rng.random(n))


def disk_transform(z):
    z = np.asarray(z, dtype=complex)
    inside = np.abs(z) < 1
    return np.where(inside, -np.pi * np.conj(z), -np.pi / np.where(inside, 1, z))


@pytest.mark.criterion(1, "Cauchy-transform oracle suite")
def test_criterion_1_cauchy_oracles(record_property):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    p, w = 0.3 + 0.2j, 2.0
    z = _ring_points(rng, 200, 0.1, 3.0, p)
    err_atom = np.max(np.abs(cauchy_transform(measure(atom(p, w)), z) - w / (p - z)))
    z = np.concatenate([_ring_points(rng, 100, 0.0, 0.9), _ring_points(rng, 100, 1.1, 4.0)])
    exact = np.where(np.abs(z) < 1, 0, -1 / z)
    err_circle = np.max(np.abs(cauchy_transform(measure(circle_measure(0, 1, 1)), z) - exact))
    z = _ring_points(rng, 200, 1.1, 4.0)
    err_disk = np.max(np.abs(cauchy_transform(measure(disk_measure(0, 1)), z) - (-np.pi / z)))
    elapsed = time.perf_counter() - t0
    record_property("detail", f"atom {err_atom:.1e}, circle {err_circle:.1e}, disk {err_disk:.1e}, "
                              f"{elapsed:.2f}s")
    assert err_atom <= 1e-6 and err_circle <= 1e-6
    assert err_disk <= 1e-4
    assert elapsed <= 10


@pytest.mark.criterion(2, "coefficient inequalities for functions analytic off a disk")
def test_criterion_2_elementary_inequalities(record_property):
    rng = np.random.default_rng(2)
    violations, worst = 0, 0.0
    for _ in range(1000):
        a = complex(*rng.normal(size=2))
        delta = float(10 ** rng.uniform(-1.5, 0.5))
        npoles = int(rng.integers(1, 5))
        poles = a + delta * np.sqrt(rng.random(npoles)) * 0.95 * np.exp(2j * np.pi * rng.random(npoles))
        orders = rng.integers(1, 4, npoles)
        coef = rng.normal(size=npoles) + 1j * rng.normal(size=npoles)
        const = complex(*rng.normal(size=2))

        def f(z, poles=poles, orders=orders, coef=coef, const=const):
            return const + sum(c / (z - q) ** o for c, q, o in zip(coef, poles, orders))

        chk = elementary_check(f, a, delta)
        violations += bool(chk.violations(1e-8))
        worst = max(worst, abs(chk.derivative) / (delta * chk.sup_norm),
                    abs(chk.beta) / (delta ** 2 * chk.sup_norm))
    record_property("detail", f"1000 functions, violations {violations}, worst ratio {worst:.3f}")
    assert violations == 0


@pytest.mark.criterion(3, "localization suite")
def test_criterion_3_localization(record_property):
    rng = np.random.default_rng(3)
    cover = build_cover(2, (-1.5, -1.5, 1.5, 1.5))
    # (a) a member away from the closed disk, where dbar f = 0
    far = [p for p in cover.members if p.support.distance(0j) > 1.1][0]
    z = np.concatenate([_ring_points(rng, 20, 0.0, 3.0), [far.center]])
    zero_err = float(np.max(np.abs(localize(disk_transform, far)(z))))
    # (b) the members sum to f
    z = _ring_points(rng, 100, 0.0, 2.0)
    total = np.zeros(100, complex)
    c0 = 0.0
    for p in cover.members:
        fl = localize(disk_transform, p, n=12, check=False)
        total += fl(z)
        if p.support.distance(0j) < 1.0 < abs(p.support.center) + 0.5:
            c0 = max(c0, fl.sup_estimate / fl.bound)
    sum_err = float(np.max(np.abs(total - disk_transform(z))))
    # (c) dbar of a localized piece vanishes off its square
    p = [q for q in cover.members if q.support.contains(0.9 + 0.1j)][0]
    fl = localize(disk_transform, p, n=12, check=False)
    pts = p.support.center + (0.6 + 0.4 * rng.random(20)) * np.exp(2j * np.pi * rng.random(20))
    d, est = dbar_fd(fl, pts, 1e-3)
    dbar_ratio = float(np.max(np.abs(d) / est))
    # (d) covering-sum inequality at 1000 points, with the measured constant
    z = 4 * (rng.random(1000) - 0.5) + 4j * (rng.random(1000) - 0.5)
    C = float(np.max(covering_sum_ratio(cover, z)))
    record_property("detail", f"zero {zero_err:.1e}, sum {sum_err:.1e}, max |dbar| {np.max(np.abs(d)):.1e} (ratio to estimate {dbar_ratio:.2f}), "
                              f"covering C {C:.2f}, sup/bound {c0:.3f}")
    assert zero_err <= 1e-6
    assert sum_err <= 1e-4
    assert dbar_ratio <= 10
    assert np.isfinite(C)


def _hand_yellow(red_cells, hull_cells, g):
    reach = g * g * 2.0 ** -g
    red = [DyadicSquare(g, i, j) for i, j in red_cells]
    span = int(math.ceil(reach * 2 ** g)) + 4
    return {(i, j) for i in range(-span, span + 2) for j in range(-span, span + 2)
            if (i, j) not in hull_cells and (i, j) not in red_cells
            and min(DyadicSquare(g, i, j).distance(r) for r in red) <= reach}


@pytest.mark.criterion(4, "coloring determinism and hand-simulated fixtures")
def test_criterion_4_coloring(record_property, tmp_path):
    zero = run_scheme(ConstantPhi(0.0), 0, 1, 3, (-4, -4, 4, 4))
    assert zero.terminated_with_unbounded_green and zero.last_generation == 2
    heavy = run_scheme(ConstantPhi(1e6, Rectangle(-4 - 4j, 4 + 4j)), 0, 1, 1, (-4, -4, 4, 4))
    g2 = heavy.generations[1]
    hull = {(0, 0), (0, 1), (1, 0), (1, 1)}
    ring = {(-1, 0), (-1, 1), (2, 0), (2, 1), (0, -1), (1, -1), (0, 2), (1, 2)}
    red_ok = set(g2.red.cells) == ring
    yellow_ok = set(g2.yellow.cells) == _hand_yellow(ring, hull, 2)
    outs = []
    for t in range(2):
        path = tmp_path / f"run{t}.svg"
        code = main(["color", "--scene", str(FIXTURES / "phi_heavy.scene"), "--a", "0", "--k", "1",
                     "--gens", "2", "--out", str(path)], stdout=io.StringIO(), stderr=io.StringIO())
        assert code == 0
        outs.append(path.read_bytes())
    record_property("detail", f"green-terminated at gen {zero.last_generation}, red {len(g2.red)}, "
                              f"yellow {len(g2.yellow)}, svg {len(outs[0])} bytes")
    assert len(g2.green) == 0 and red_ok and yellow_ok
    assert outs[0] == outs[1]


@pytest.mark.criterion(5, "light-set vanishing consistency")
def test_criterion_5_vanishing_consistency(record_property):
    t0 = time.perf_counter()
    cases = [(measure(circle_measure(0, 1, 1)), Disk(0, 0.5)),
             (measure(disk_measure(0, 1)), Disk(0.5, 0.2)),
             (measure(atom(0, 1)), Annulus(0, 1, 2))]
    reports = [vanishing_consistency(mu, V, samples=5, k_max=6) for mu, V in cases]
    elapsed = time.perf_counter() - t0
    record_property("detail", ", ".join(f"light {r.fraction_light:.1f} mass {r.mass:.3g}"
                                        for r in reports) + f", {elapsed:.1f}s")
    assert not any(r.inconsistent for r in reports)
    assert reports[0].fraction_light == 1.0 and reports[0].mass == 0.0
    assert elapsed <= 60


@pytest.mark.criterion(6, "Bergman/Hardy kernel reproduction")
def test_criterion_6_kernels(record_property):
    basis = FunctionBasis(0, 30)
    disk = measure(disk_measure(0, 1))
    circle = measure(circle_measure(0, 1, 1))
    b0 = evaluation_bound(0, basis, disk).limit
    b5 = evaluation_bound(0.5, basis, disk).limit
    h0 = evaluation_bound(0, basis, circle).limit
    out = evaluation_bound(1.5, basis, circle)
    e0 = abs(b0 - 1 / math.sqrt(math.pi)) / (1 / math.sqrt(math.pi))
    e5 = abs(b5 - math.sqrt(16 / (9 * math.pi))) / math.sqrt(16 / (9 * math.pi))
    record_property("detail", f"disk(0) rel {e0:.1e}, disk(0.5) rel {e5:.1e}, circle(0) {h0:.6f}, "
                              f"divergent(1.5) {out.divergent}")
    assert e0 <= 0.02 and e5 <= 0.02
    assert abs(h0 - 1) <= 0.01
    assert out.divergent


@pytest.mark.criterion(7, "abpe scan geometry")
def test_criterion_7_scan_geometry(record_property):
    disk = measure(disk_measure(0, 1))
    scan = scan_abpe(disk, FunctionBasis(0, 30), (-1.5, -1.5, 1.5, 1.5), 1 / 64, K=[Disk(0, 1)])
    truth = np.abs(scan.points) < 1
    jac = float(np.sum(scan.region & truth) / np.sum(scan.region | truth))
    scene = load_scene(FIXTURES / "two_disks_segment.scene")
    mu = scene.measure()
    x0, y0, x1, y1 = mu.bbox()
    two = scan_abpe(mu, FunctionBasis(complex((x0 + x1) / 2, (y0 + y1) / 2), 30), None, 1 / 32, K=scene.K)
    seg = scan_abpe(measure(segment_measure(-1, 1)), FunctionBasis(0, 30), (-1.5, -1, 1.5, 1), 1 / 64,
                    K=[Segment(-1, 1)])
    record_property("detail", f"Jaccard {jac:.3f}, two-disk components {len(two.components)}, "
                              f"segment components {len(seg.components)}")
    assert jac >= 0.9
    assert len(two.components) == 2
    assert len(seg.components) == 0


@pytest.mark.criterion(8, "harmonic measures, sweeps and singularity")
def test_criterion_8_harmonic(record_property):
    rng = np.random.default_rng(8)
    mass_err = 0.0
    for z in _ring_points(rng, 10, 0, 0.99):
        mass_err = max(mass_err, abs(harmonic_measure(disk_domain(), z).total_mass() - 1))
    log_err = 0.0
    for z in _ring_points(rng, 10, 0.3, 0.95):
        hm = harmonic_measure(annulus_domain(0, 0.25, 1), z)
        mass_err = max(mass_err, abs(hm.total_mass() - 1))
        log_err = max(log_err, abs(hm.circle_mass(1) - math.log(1 / abs(z)) / math.log(4)))
    nu = sweep(measure(atom(0.5, 1)), disk_domain(), n=2 ** 12)
    t = nu.angles
    poisson = (1 - 0.25) / (1 - np.cos(t) + 0.25) / (2 * np.pi)
    sweep_err = float(np.max(np.abs(nu.densities[0] - poisson)))

    def uniform(c, r):
        return BoundaryMeasure((Circle(complex(c), r),), (np.full(512, 1 / (2 * np.pi * r)),))
    verdicts = [mutually_singular(uniform(0, 1), uniform(3, 1)).singular,
                not mutually_singular(uniform(0, 1), harmonic_measure(disk_domain(), 0.5, n=512)).singular,
                mutually_singular(uniform(0, 1), uniform(2, 1)).singular]
    record_property("detail", f"mass {mass_err:.1e}, log-law {log_err:.1e}, sweep {sweep_err:.1e}, "
                              f"singularity verdicts {verdicts}")
    assert mass_err <= 1e-8 and log_err <= 1e-6 and sweep_err <= 1e-4
    assert all(verdicts)


@pytest.mark.criterion(9, "decomposition pipeline")
def test_criterion_9_decomposition(record_property):
    t0 = time.perf_counter()
    scene = load_scene(FIXTURES / "two_disks_segment.scene")
    dec = decompose(scene.measure(), scene.K, degree=scene.degree)
    parts = dec.parts
    ann = load_scene(FIXTURES / "annulus.scene")
    adec = decompose(ann.measure(), ann.K, degree=ann.degree)
    elapsed = time.perf_counter() - t0
    (apart,) = adec.parts
    record_property("detail", f"Delta_0 {list(dec.delta0)}, parts {[p['labels'] for p in parts]}, "
                              f"closures contain {[p['closure_contains_support'] for p in parts]}, "
                              f"annulus connectivity {apart['connectivity']} <= {apart['k_connectivity']}, "
                              f"{elapsed:.1f}s")
    assert dec.delta0 == ("seg",)
    assert len(parts) == 2
    assert sorted(l for p in parts for l in p["labels"]) == ["left", "right"]
    assert all(len(p["labels"]) == 1 and p["closure_contains_support"] for p in parts)
    assert apart["connectivity"] == 2 and apart["k_connectivity"] == 2
    assert elapsed <= 300
