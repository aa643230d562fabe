import math

import numpy as np
import pytest

from _corpus import ACCEPTANCE_RESULTS, SQRT3, SQUARE
from geomax.instances import equilateral_clusters, regular_polygon


@pytest.fixture
def square():
    return SQUARE.copy()


@pytest.fixture
def tri6():
    return equilateral_clusters(6).points


@pytest.fixture
def hexagon():
    return regular_polygon(6).points


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


__all__ = ["math", "SQRT3"]
