import os

import numpy as np
import pytest

from turan_domains.geometry.ConvexBody import Ball, Box, regular_hexagon
from turan_domains.geometry.Lattice import Lattice

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')


@pytest.fixture
def interval():
    return Box([1.0])


@pytest.fixture
def square():
    return Box([1.0, 1.0])


@pytest.fixture
def unit_cube():
    return Box([0.5, 0.5])


@pytest.fixture
def disk():
    return Ball(1.0, 2)


@pytest.fixture
def hexagon():
    return regular_hexagon(1.0)


@pytest.fixture
def z2():
    return Lattice.integer(2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def configs():
    return CONFIGS
