"""Shared builders for the test suite."""

import numpy as np
import pytest

import besovext as bx


def unit_square(h):
    """Grid space on [0, 1]^2 with spacing h."""
    return bx.build_grid(h, ([0.0, 0.0], [1.0, 1.0]))


def ambient_with_box(h, lo=-1.0, hi=2.0):
    """Ambient grid with a centered unit-box member set."""
    space = bx.build_grid(h, ([lo, lo], [hi, hi]))
    mask = space.subset(bx.box_region([0.0, 0.0], [1.0, 1.0]))
    return space, mask


def random_cloud(rng, n, dim=2, weight_lo=0.5, weight_hi=2.0):
    """Random point cloud with mildly varying weights."""
    points = rng.uniform(0.0, 1.0, (n, dim))
    weights = rng.uniform(weight_lo, weight_hi, n)
    return bx.MetricMeasureSpace(points=points, weights=weights)


def smooth_field(space, coeffs):
    """Low-frequency trigonometric sample function on a space."""
    c = np.asarray(coeffs, dtype=float)
    pts = space.points
    return (np.cos(pts @ (c[:2] + [2.0, 1.0]))
            + 0.5 * np.sin(pts @ (c[2:4] + [1.0, 3.0])))


@pytest.fixture(scope="session")
def coarse_square():
    return unit_square(1.0 / 8.0)


@pytest.fixture(scope="session")
def box_geometry():
    return ambient_with_box(1.0 / 6.0)
