"""Shared fixtures for the simulator test suite."""

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings as hypothesis_settings

from core.entities.dirac import MassParameter, Potential
from core.entities.grid import SpacetimeGrid, SpinorField
from infrastructure.config.settings import settings

hypothesis_settings.register_profile("ci", max_examples=50, deadline=None,
                                     suppress_health_check=[HealthCheck.function_scoped_fixture])
hypothesis_settings.register_profile("dev", max_examples=15, deadline=None,
                                     suppress_health_check=[HealthCheck.function_scoped_fixture])
hypothesis_settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture(autouse=True)
def isolated_weight_table(tmp_path, monkeypatch):
    """Keep the persistent four-point weight table out of the working tree."""
    monkeypatch.setattr(settings.sampling, "weight_cache_path", str(tmp_path / "weights.json"))


@pytest.fixture
def mass():
    return MassParameter(1.0)


@pytest.fixture
def small_grid():
    return SpacetimeGrid(n_t=8, n_x=8, dt=0.5, dx=0.5)


@pytest.fixture
def free_grid():
    return SpacetimeGrid(n_t=16, n_x=16, dt=0.1, dx=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(grid: SpacetimeGrid, rng: np.random.Generator, offset: float = 1.0,
                 scale: float = 0.3) -> SpinorField:
    """Complex field with density bounded away from zero."""
    noise = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return SpinorField(grid, offset + scale * noise)


@pytest.fixture
def make_field(rng):
    def factory(grid: SpacetimeGrid, **kwargs) -> SpinorField:
        return random_field(grid, rng, **kwargs)
    return factory


@pytest.fixture
def zero_potential():
    def factory(grid: SpacetimeGrid) -> Potential:
        return Potential.zeros(grid)
    return factory
