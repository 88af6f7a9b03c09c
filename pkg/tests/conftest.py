import sys

import pytest
from hypothesis import HealthCheck, settings

from imgsearch.funcmodel import LinearCoord, linear_function

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ENGINES = ("tradeoff", "dictionary")


@pytest.fixture
def f3x():
    """f(x) = 3x mod 16 on N = 8, W = 4."""
    return linear_function(8, [LinearCoord(3, mod=16)], [4])


@pytest.fixture
def fmod3():
    return linear_function(8, [LinearCoord(1, mod=3)], [2])


@pytest.fixture
def fmod4():
    return linear_function(8, [LinearCoord(1, mod=4)], [2])


@pytest.fixture
def fgrid():
    """f(x) = (x mod 4, x div 4) on N = 8."""
    return linear_function(8, [LinearCoord(1, mod=4), LinearCoord(1, div=4)], [2, 1])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
