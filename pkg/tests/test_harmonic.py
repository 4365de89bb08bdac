"""Harmonic measures of disks and annuli, sweeps and mutual singularity."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from planar_abpe.errors import InvalidInputError, UnsupportedDomainError
from planar_abpe.harmonic import (BoundaryMeasure, CircularDomain, annulus_domain, disk_domain,
                                  harmonic_measure, mutually_singular, sweep)
from planar_abpe.measure import atom, circle_measure, disk_measure, measure, segment_measure
from planar_abpe.shapes import Circle


def poisson(r, theta):
    """Poisson kernel of the unit disk at radius r (angle 0), per unit d(theta)."""
    return (1 - r * r) / (1 - 2 * r * np.cos(theta) + r * r) / (2 * np.pi)


def test_disk_center_is_uniform():
    hm = harmonic_measure(disk_domain(), 0)
    assert np.allclose(hm.densities[0], 1 / (2 * np.pi), atol=1e-14)
    assert abs(hm.arc_mass(0, 0.3, 0.3 + np.pi) - 0.5) <= 1e-12


def test_disk_poisson_density_and_arc_mass():
    hm = harmonic_measure(disk_domain(), 0.5)
    assert np.max(np.abs(hm.densities[0] - poisson(0.5, hm.angles))) <= 1e-12
    oracle, _ = quad(lambda t: poisson(0.5, t), -np.pi / 2, np.pi / 2, epsabs=1e-14)
    assert abs(hm.arc_mass(0, -np.pi / 2, np.pi / 2) - oracle) <= 1e-10
    assert oracle == pytest.approx(0.5 + math.atan(4 / 3) / math.pi, abs=1e-12)


@pytest.mark.parametrize("z", [0.5, 0.5j, -0.3 + 0.35j, 0.9])
def test_annulus_inner_mass_log_law(z):
    dom = annulus_domain(0, 0.25, 1.0)
    hm = harmonic_measure(dom, z)
    expected = math.log(1 / abs(z)) / math.log(1 / 0.25)
    assert abs(hm.circle_mass(1) - expected) <= 1e-6
    assert abs(hm.total_mass() - 1) <= 1e-8


points = st.tuples(st.floats(0.0, 0.999), st.floats(0, 2 * math.pi)).map(lambda t: t[0] * np.exp(1j * t[1]))


@settings(max_examples=40, deadline=None)
@given(z=points)
def test_harmonic_measure_is_probability(z):
    hm = harmonic_measure(disk_domain(), z)
    assert abs(hm.total_mass() - 1) <= 1e-8
    assert np.min(hm.densities[0].real) >= -1e-12


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.3, 0.95), t=st.floats(0, 2 * math.pi))
def test_annulus_harmonic_measure_is_probability(r, t):
    hm = harmonic_measure(annulus_domain(0.2, 0.25, 1.0), 0.2 + r * np.exp(1j * t))
    assert abs(hm.total_mass() - 1) <= 1e-8
    assert all(np.min(d.real) >= -1e-10 for d in hm.densities)


def test_mean_value_property():
    dom = annulus_domain(0, 0.4, 1.2)
    u = lambda w: np.where(np.abs(w) > 1, np.cos(np.angle(w)) ** 2, 0.3 * np.sin(np.angle(w)))
    value = lambda z: harmonic_measure(dom, z, n=4096).integrate(u).real
    for z0 in (0.7, -0.5j, 0.6 + 0.5j):
        ring = np.mean([value(z0 + 0.05 * np.exp(2j * np.pi * q / 8)) for q in range(8)])
        assert abs(ring - value(z0)) <= 1e-4


def test_invalid_points_and_domains():
    with pytest.raises(InvalidInputError):
        harmonic_measure(disk_domain(), 1.0)
    three = CircularDomain(Circle(0j, 3.0), (Circle(-1 + 0j, 0.5), Circle(1 + 0j, 0.5)))
    with pytest.raises(UnsupportedDomainError):
        harmonic_measure(three, 0.0)


def test_sweep_of_atoms():
    nu = sweep(measure(atom(0, 1)), disk_domain(), n=4096)
    assert np.allclose(nu.densities[0], 1 / (2 * np.pi), atol=1e-14)
    nu = sweep(measure(atom(0.5, 1)), disk_domain(), n=4096)
    assert np.max(np.abs(nu.densities[0] - poisson(0.5, nu.angles))) <= 1e-4


def test_sweep_keeps_boundary_mass():
    mu = measure(circle_measure(0, 1, 2.0), atom(1j, 0.5))
    nu = sweep(mu, disk_domain(), n=256)
    assert np.allclose(nu.densities[0], 2.0 / (2 * np.pi), atol=1e-14)
    assert nu.atoms == ((1j, 0.5 + 0j),)


def test_sweep_rejects_outside_support():
    with pytest.raises(InvalidInputError):
        sweep(measure(atom(1.5, 1)), disk_domain())


def _harmonic_tests():
    return [lambda z: np.real(z ** 2), lambda z: np.imag(z ** 3 - 2 * z), lambda z: np.log(np.abs(z)),
            lambda z: np.real(1 / z)]


def test_sweep_duality_annulus():
    dom = annulus_domain(0, 0.5, 1.5)
    mu = measure(disk_measure(0.9, 0.3, density=lambda z: 1 + np.real(z)),
                 segment_measure(-1.2, -0.7j), atom(1.1j, 0.25), m=48)
    nu = sweep(mu, dom, n=4096)
    pts, w = mu.nodes()
    for u in _harmonic_tests():
        assert abs(np.sum(u(pts) * w) - nu.integrate(u)) <= 1e-8


@settings(max_examples=20, deadline=None)
@given(c1=st.floats(-0.5, 0.5), c2=st.floats(-0.5, 0.5), s=st.floats(0.1, 3.0))
def test_sweep_is_linear_and_mass_preserving(c1, c2, s):
    dom = disk_domain()
    a = measure(atom(c1 + 0.1j, 1.0), m=16)
    b = measure(disk_measure(c2, 0.3), m=16)
    both = measure(atom(c1 + 0.1j, s), disk_measure(c2, 0.3), m=16)
    na, nb, nboth = (sweep(x, dom, n=1024) for x in (a, b, both))
    combo = na.scaled(s) + nb
    assert np.max(np.abs(combo.densities[0] - nboth.densities[0])) <= 1e-9
    pts, w = both.nodes()
    assert abs(nboth.total_mass() - np.sum(w)) <= 1e-6


def _uniform(center, radius, n=512):
    c = Circle(complex(center), float(radius))
    return BoundaryMeasure((c,), (np.full(n, 1 / (2 * np.pi * radius)),))


@pytest.mark.parametrize("nu1, nu2, singular", [
    (_uniform(0, 1), _uniform(3, 1), True),
    (_uniform(0, 1), harmonic_measure(disk_domain(), 0.5, n=512), False),
    (_uniform(0, 1), _uniform(2, 1), True),
])
def test_mutual_singularity_fixtures(nu1, nu2, singular):
    v = mutually_singular(nu1, nu2)
    assert v.singular is singular
    if not singular:
        assert v.overlap >= 0.6
    else:
        assert v.overlap == 0.0


@settings(max_examples=30, deadline=None)
@given(s1=st.floats(1e-3, 1e3), s2=st.floats(1e-3, 1e3), z=st.floats(-0.9, 0.9))
def test_singularity_symmetric_and_scale_invariant(s1, s2, z):
    a = _uniform(0, 1, 256)
    b = harmonic_measure(disk_domain(), z, n=256)
    base = mutually_singular(a, b).singular
    assert mutually_singular(b, a).singular == base
    assert mutually_singular(a.scaled(s1), b.scaled(s2)).singular == base


def test_atoms_overlap():
    c = Circle(0j, 1.0)
    a = BoundaryMeasure((c,), (np.zeros(64),), ((1 + 0j, 1.0),))
    b = BoundaryMeasure((c,), (np.zeros(64),), ((1 + 0j, 2.0),))
    v = mutually_singular(a, b)
    assert not v.singular and v.overlap == pytest.approx(1.0)
