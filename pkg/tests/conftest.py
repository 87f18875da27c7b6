import numpy as np
import pytest

from nsdv.model import FluidState, Grid1D, ModelParams


@pytest.fixture
def params():
    return ModelParams(alpha=0.75, gamma=2.0, half_length=8.0)


@pytest.fixture
def grid():
    return Grid1D(257, 8.0)


@pytest.fixture
def equilibrium(grid):
    n = grid.n_cells
    return FluidState(time=0.0, rho=np.ones(n), u=np.zeros(n))


def smooth_state(grid, rho_amp=0.1, u_amp=0.05):
    """Generic smooth far-field-compatible state for derivative checks."""
    x = grid.coords
    rho = 1.0 + rho_amp * np.exp(-(x**2))
    u = u_amp * x * np.exp(-(x**2))
    return FluidState(time=0.0, rho=rho, u=u)
