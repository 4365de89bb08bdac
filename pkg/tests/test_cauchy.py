"""Cauchy transforms, expansions at infinity, Vitushkin covers and localization."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planar_abpe.cauchy import (build_cover, cauchy_transform, coefficients_at_infinity,
                                covering_sum_ratio, dbar_fd, elementary_check, localize)
from planar_abpe.errors import DiagnosticError, ResolutionError, SingularityError
from planar_abpe.measure import (annulus_measure, atom, circle_measure, disk_measure, measure,
                                 segment_measure)


def disk_transform(z):
    """Closed form of the Cauchy transform of unit area density on the unit disk."""
    z = np.asarray(z, dtype=complex)
    inside = np.abs(z) < 1
    return np.where(inside, -np.pi * np.conj(z), -np.pi / np.where(inside, 1, z))


@pytest.mark.parametrize("mu, z, expected, tol", [
    (measure(atom(0, 1)), 2, -0.5, 1e-15),
    (measure(circle_measure(0, 1, 1)), 0, 0.0, 1e-8),
    (measure(circle_measure(0, 1, 1)), 2, -0.5, 1e-8),
    (measure(disk_measure(0, 1)), 2, -math.pi / 2, 1e-4),
])
def test_cauchy_examples(mu, z, expected, tol):
    assert abs(cauchy_transform(mu, z) - expected) <= tol


def test_cauchy_on_atom_raises():
    with pytest.raises(SingularityError):
        cauchy_transform(measure(atom(0.5, 1)), 0.5)


def test_cauchy_area_near_field_inside_disk():
    z = np.array([0.3 + 0.1j, -0.5j, 0.99, 0.0])
    assert np.max(np.abs(cauchy_transform(measure(disk_measure()), z) - disk_transform(z))) <= 1e-4


def test_cauchy_segment_closed_form():
    # int_0^1 dt/(t - z) = log((1 - z)/(-z))
    z = np.array([0.5 + 0.2j, -1 + 1j, 2.0 - 0.05j])
    exact = np.log((1 - z) / (-z))
    got = cauchy_transform(measure(segment_measure(0, 1)), z)
    assert np.max(np.abs(got - exact)) <= 1e-10


def test_cauchy_is_analytic_off_support():
    mu = measure(disk_measure(0, 1, density=lambda z: 1 + np.real(z) ** 2), annulus_measure(3, 0.5, 1))
    f = lambda z: cauchy_transform(mu, z)
    z = np.array([2.0j, -2.5 + 0.5j, 1.6 - 1.4j])
    d, est = dbar_fd(f, z, 1e-3)
    assert np.all(np.abs(d) <= 10 * est)


def test_dbar_of_area_transform_is_minus_pi_density():
    g = lambda z: 1 + 0.5 * np.real(z)
    mu = measure(disk_measure(0, 1, density=g), m=96)
    f = lambda z: cauchy_transform(mu, z)
    z = np.array([0.1 + 0.2j, -0.3j, 0.4])
    d, _ = dbar_fd(f, z, 1e-3)
    assert np.all(np.abs(d - (-np.pi * g(z))) <= 0.05 * np.pi * np.abs(g(z)))


@pytest.mark.parametrize("f, z0, R, a0, a1, a2, tol", [
    (lambda z: 1 / (z - 1), 1, 1, 0, 1, 0, 1e-12),
    (lambda z: 3 / (z - 1j) ** 2, 1j, 1, 0, 0, 3, 1e-12),
    (lambda z: 1 / z, 1, 2, 0, 1, -1, 1e-8),
])
def test_coefficients_at_infinity(f, z0, R, a0, a1, a2, tol):
    c = coefficients_at_infinity(f, z0, R)
    assert abs(c.value_at_infinity - a0) <= tol
    assert abs(c.a1 - a1) <= tol
    assert abs(c.a2 - a2) <= tol


def test_coefficients_reject_non_analytic():
    with pytest.raises(DiagnosticError):
        coefficients_at_infinity(lambda z: z, 0, 1)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), delta=st.floats(0.05, 2.0))
def test_elementary_inequalities(seed, delta):
    rng = np.random.default_rng(seed)
    a = complex(*rng.normal(size=2))
    poles = a + delta * 0.9 * np.sqrt(rng.random(3)) * np.exp(2j * np.pi * rng.random(3))
    coef = rng.normal(size=3) + 1j * rng.normal(size=3)
    f = lambda z: sum(c / (z - p) for c, p in zip(coef, poles)) + coef[0] / (z - poles[1]) ** 2
    chk = elementary_check(f, a, delta)
    assert chk.violations(1e-8) == []


def test_cover_geometry():
    cov = build_cover(2, (0, 0, 1, 1))
    assert cov.side == pytest.approx(1.25 * 0.25)
    centers = cov.centers
    assert np.allclose((centers.real - 0.125) / 0.25, np.round((centers.real - 0.125) / 0.25))
    for p in cov.members[:5]:
        s = p.support
        assert (s.hi - s.lo).real == pytest.approx(cov.side)
        assert s.center == pytest.approx(p.center)


def test_cover_partition_of_unity_and_gradient():
    cov = build_cover(2, (0, 0, 1, 1))
    rng = np.random.default_rng(3)
    x0, y0, x1, y1 = cov.interior()
    z = x0 + (x1 - x0) * rng.random(1000) + 1j * (y0 + (y1 - y0) * rng.random(1000))
    assert np.max(np.abs(cov.partition_sum(z) - 1)) <= 1e-12
    assert cov.max_gradient() <= cov.gradient_bound
    for p in cov.members[:6]:
        vals = p(z)
        assert np.all((vals >= 0) & (vals <= 1))
        outside = ~p.support.contains(z)
        assert np.all(vals[outside] == 0)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(0, 4), x=st.floats(-3, 3), y=st.floats(-3, 3))
def test_partition_sum_property(k, x, y):
    cov = build_cover(k, (x - 1, y - 1, x + 1, y + 1))
    assert abs(cov.partition_sum(np.array([complex(x, y)]))[0] - 1) <= 1e-12


def test_covering_sum_ratio_is_bounded():
    cov = build_cover(2, (-1, -1, 1, 1))
    rng = np.random.default_rng(5)
    z = 4 * (rng.random(1000) - 0.5) + 4j * (rng.random(1000) - 0.5)
    ratio = covering_sum_ratio(cov, z)
    assert np.all(np.isfinite(ratio))
    assert ratio.max() < 50


def test_localize_analytic_function_vanishes():
    cov = build_cover(2, (-1, -1, 1, 1))
    p = cov.members[7]
    fl = localize(lambda z: np.exp(z) / (z - 5), p)
    z = np.array([2 + 2j, p.center, -3.0])
    assert np.max(np.abs(fl(z))) <= 1e-6


def test_localize_full_partition_reproduces_outside():
    # phi = 1 on a neighbourhood of the disk: the sum of all members, evaluated off the disk
    cov = build_cover(1, (-1.5, -1.5, 1.5, 1.5))
    z = np.array([1.3 + 0.2j, -1.2 - 0.6j, 0.1 + 1.25j])
    total = sum(localize(disk_transform, p, n=12, check=False)(z) for p in cov.members)
    assert np.max(np.abs(total - disk_transform(z))) <= 1e-4


def test_localized_function_vanishes_at_infinity_and_is_bounded():
    cov = build_cover(2, (-1, -1, 1, 1))
    p = [q for q in cov.members if q.support.contains(0.9 + 0.1j)][0]
    fl = localize(disk_transform, p, n=12, check=False)
    far = fl(np.array([1e6, 1e6j]))
    assert np.max(np.abs(far)) < 1e-5
    assert fl.sup_estimate <= fl.bound


def test_localize_flags_unresolved_dbar():
    # dbar of the disk transform jumps across the unit circle inside this member's support
    cov = build_cover(2, (-1, -1, 1, 1))
    p = [q for q in cov.members if q.support.contains(0.9 + 0.1j)][0]
    with pytest.raises(ResolutionError):
        localize(disk_transform, p, n=12)
