"""Shared fixtures: small commensurate grids and seeded random fields."""

import numpy as np
import pytest

from tornsim import GridSpec, VectorField, leray_project


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_grid():
    """16^3 grid with origin on the h-lattice, z bounded away from 0."""
    return GridSpec(16, 16, 16, 0.5, (-4.0, -4.0, 1.0))


@pytest.fixture
def skew_grid():
    """Anisotropic point counts to catch axis-ordering mistakes."""
    return GridSpec(16, 12, 14, 0.5, (-4.0, -3.0, 1.0))


def random_field(grid, rng, solenoidal=False):
    v = VectorField(grid, rng.standard_normal((3,) + grid.shape))
    return leray_project(v) if solenoidal else v


def energy_norm(field):
    from tornsim import energy

    return float(np.sqrt(energy(field)))


def rel_energy_err(a, b):
    """Energy-norm relative difference of two same-grid fields."""
    diff = VectorField(a.grid, a.data - b.data)
    return energy_norm(diff) / energy_norm(b)
