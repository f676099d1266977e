import numpy as np
import pytest
from hypothesis import settings

from delaycert.core import DenseTrajectory

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


@pytest.fixture
def fixture_grid():
    """Piecewise-linear trajectory through 1.0, 0.6, 0.8, 0.3, 0.1 at t = 0..4."""
    return DenseTrajectory.piecewise_linear(np.arange(5.0), [1.0, 0.6, 0.8, 0.3, 0.1])


@pytest.fixture
def exp_decay():
    """y(t) = exp(-t) on [0, 10] from exact values and slopes."""
    t = np.linspace(0.0, 10.0, 2001)
    return DenseTrajectory.from_nodes(t, np.exp(-t), -np.exp(-t))
