"""Shared fixtures.

The 2-D solves are the only expensive pieces of the suite, so they are
session-scoped: the ellipsoid pair (one grid doubling) and the round-annulus
field are each solved once and shared between the solver tests and the
acceptance checks.
"""

import numpy as np
import pytest

from pcapflow import geometry, radial, solver2d


@pytest.fixture(scope="session")
def euclid3():
    return geometry.euclidean(3)


@pytest.fixture(scope="session")
def schw1():
    return geometry.schwarzschild(1.0)


@pytest.fixture(scope="session")
def cone_half():
    return geometry.cone(3, aperture=0.5)


@pytest.fixture(scope="session")
def radial_model_set(euclid3, cone_half, schw1):
    """The three reference models with their standard annuli (r0, R)."""
    return [(euclid3, 1.0, 8.0), (cone_half, 1.0, 8.0), (schw1, 2.2, 12.0)]


@pytest.fixture(scope="session")
def sphere_field():
    """Regularized 2-D solve on the round annulus [1, 3], checked against
    the radial oracle; u_R matches the exact p-harmonic boundary value so
    the eps-perturbation is the only source of profile error."""
    dom = solver2d.sphere_domain(1.0, 3.0)
    return solver2d.solve_2d(dom, p=1.5, u_R=1.0 / 3.0, shape=(128, 64), eps=1e-4, tol=1e-10)


@pytest.fixture(scope="session")
def ellipsoid_fields():
    """Ellipsoid annulus at two resolutions (one doubling) for the
    derivative-identity and convergence-order checks."""
    dom = solver2d.ellipsoid_domain(1.3, 1.0, R=4.0)
    out = {}
    for shape in ((128, 64), (256, 128)):
        out[shape] = solver2d.solve_2d(dom, p=1.5, u_R=0.05, shape=shape, eps=1e-4, tol=1e-10)
    return out


@pytest.fixture(scope="session")
def ellipsoid_128(ellipsoid_fields):
    return ellipsoid_fields[(128, 64)]


def midband(field, lo_frac=0.25, hi_frac=0.7, num=7):
    """Level values away from both boundary layers of a 2-D field."""
    lo, hi = field.w_range()
    return np.linspace(lo + lo_frac * (hi - lo), lo + hi_frac * (hi - lo), num)
