"""
Shared fixtures for the test suite
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
os.environ.setdefault('DELAYSIM_ENV', 'testing')

from delaysim.models.spectral_operator import SpatialGrid  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def point():
    return SpatialGrid.point()


@pytest.fixture
def neumann():
    return SpatialGrid.interval(2.0, 8, 'neumann')


@pytest.fixture
def dirichlet():
    return SpatialGrid.interval(1.0, 8, 'dirichlet')
