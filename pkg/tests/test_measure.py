"""Planar measures: masses, integrals, restriction and quadrature convergence."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planar_abpe.errors import InvalidInputError, NumericDomainError
from planar_abpe.measure import (annulus_measure, atom, circle_measure, complement, disk_measure,
                                 integrate, measure, restrict, segment_measure, total_mass)
from planar_abpe.shapes import Disk, HalfPlane, Rectangle


@pytest.mark.parametrize("mu, expected, tol", [
    (measure(atom(0, 1)), 1.0, 0.0),
    (measure(circle_measure(0, 1, 1)), 1.0, 1e-10),
    (measure(disk_measure(0, 1)), math.pi, 1e-6),
    (measure(annulus_measure(0, 0.5, 1)), math.pi * 0.75, 1e-6),
    (measure(segment_measure(0, 3 + 4j, 2.0)), 10.0, 1e-12),
    (measure(disk_measure(0, 1, density=lambda z: np.abs(z) ** 2)), math.pi / 2, 1e-6),
])
def test_total_mass(mu, expected, tol):
    assert abs(total_mass(mu) - expected) <= tol


@pytest.mark.parametrize("mu, f, expected, tol", [
    (measure(atom(2, 1)), lambda z: z, 2.0, 0.0),
    (measure(circle_measure(0, 1, 1)), lambda z: z, 0.0, 1e-10),
    (measure(disk_measure(0, 1)), lambda z: np.abs(z) ** 2, math.pi / 2, 1e-6),
])
def test_integrate_examples(mu, f, expected, tol):
    assert abs(integrate(mu, f) - expected) <= tol


def test_integrate_rejects_nonfinite():
    with pytest.raises(NumericDomainError), np.errstate(divide="ignore", invalid="ignore"):
        integrate(measure(atom(0, 1)), lambda z: 1 / z)


def test_restrict_by_label_and_region():
    mu = measure(disk_measure(-2, 1, label="disk1"), disk_measure(2, 1, label="disk2"))
    sub = restrict(mu, ["disk1"])
    assert sub.labels == ["disk1"]
    with pytest.raises(InvalidInputError):
        restrict(mu, ["nope"])
    circ = measure(circle_measure(0, 1, 1))
    upper = HalfPlane(0j, 1j)
    assert abs(total_mass(restrict(circ, upper)) - 0.5) <= 1e-8
    disk = measure(disk_measure(0, 1))
    assert abs(total_mass(restrict(disk, Disk(0, 0.5))) - math.pi / 4) <= 1e-6


regions = st.sampled_from([Disk(0.3, 0.6), HalfPlane(0.1j, 1 + 1j), Rectangle(-0.4 - 0.2j, 0.5 + 2j),
                           Disk(1.0, 0.5)])


@settings(max_examples=30, deadline=None)
@given(region=regions)
def test_restriction_is_additive(region):
    mu = measure(disk_measure(0, 1, label="d"), circle_measure(0.2, 1.3, 2.0, label="c"),
                 atom(0.9, 0.5, label="a"), segment_measure(-1, 1j, 1.5, label="s"), m=48)
    total = total_mass(mu)
    parts = total_mass(restrict(mu, region)) + total_mass(restrict(mu, complement(region)))
    assert abs(parts - total) <= 1e-6 * abs(total)


def test_duplicate_and_default_labels():
    with pytest.raises(InvalidInputError):
        measure(atom(0, label="x"), atom(1, label="x"))
    mu = measure(atom(0), atom(1, label="c1"))
    assert mu.labels == ["c2", "c1"]


def test_positivity_flag():
    with pytest.raises(InvalidInputError):
        measure(atom(0, -1), positive=True)
    mu = measure(disk_measure(0, 1), positive=True)
    assert integrate(mu, lambda z: np.abs(z)).real >= 0


def test_additivity_over_components():
    comps = [disk_measure(0, 1, label="d"), atom(2, 1j, label="a"), circle_measure(0, 2, label="c")]
    f = lambda z: np.exp(z) + np.conj(z)
    whole = integrate(measure(*comps), f)
    assert whole == pytest.approx(sum(integrate(measure(c), f) for c in comps), abs=1e-12)


def test_quadrature_convergence_halves():
    f = lambda z: np.exp(np.real(z)) * np.cos(np.imag(z))
    comps = [disk_measure(0.2, 1.0, density=lambda z: 1 + np.real(z) ** 2),
             segment_measure(-1, 1 + 1j)]
    exact = integrate(measure(*comps, m=256), f)
    prev = None
    for m in (4, 8, 16):
        err = abs(integrate(measure(*comps, m=m), f) - exact)
        if prev is not None:
            assert err <= 0.5 * prev + 1e-13
        prev = err


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-2, 2), r=st.floats(0.1, 3), mass=st.floats(0.1, 10))
def test_circle_measure_mass(c, r, mass):
    assert abs(total_mass(measure(circle_measure(c, r, mass))) - mass) <= 1e-10 * mass
