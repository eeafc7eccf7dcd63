import numpy as np
import pytest

from romstab import pipeline
from romstab.config import preset
from romstab.fem import GridSpec, PhysicalParams, assemble


@pytest.fixture(scope="session")
def test1_config():
    return preset("test1")


@pytest.fixture(scope="session")
def test1_setup(test1_config):
    return pipeline.build_rom(test1_config)


@pytest.fixture(scope="session")
def small_problem():
    """12-element grid with non-trivial boundary data and forcing."""
    grid = GridSpec(12)
    params = PhysicalParams.from_reynolds(
        1000.0, kappa=5e-4, c=1e-2, w_left=0.3, w_right=0.2, T_left=0.5, T_right=0.1,
        forcing=lambda t, x: np.sin(np.pi * x) * (1.0 + t),
    )
    return grid, params, assemble(grid, params)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
