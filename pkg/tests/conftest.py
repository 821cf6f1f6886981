import math

import numpy as np
import pytest

from torque_track.dynamics import LinkParams, MechanismModel

G = 9.81


def pendulum(damping: float = 0.0) -> MechanismModel:
    """Point-mass pendulum: m = 1 kg, l = l_c = 1 m."""
    return MechanismModel((LinkParams(1.0, 1.0, 1.0, 0.0, damping),), G)


def twolink(damping: float = 0.0) -> MechanismModel:
    """Two uniform unit rods."""
    link = LinkParams(1.0, 1.0, 0.5, 1.0 / 12.0, damping)
    return MechanismModel((link, link), G)


def threelink() -> MechanismModel:
    return MechanismModel(
        (
            LinkParams(1.2, 1.0, 0.5, 0.1),
            LinkParams(1.0, 0.8, 0.4, 0.0533),
            LinkParams(0.6, 0.6, 0.3, 0.018),
        ),
        G,
    )


@pytest.fixture
def pend():
    return pendulum()


@pytest.fixture
def arm2():
    return twolink()


@pytest.fixture(params=[1, 2, 3], ids=["1link", "2link", "3link"])
def chain(request):
    return {1: pendulum, 2: twolink, 3: threelink}[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, n):
    return rng.uniform(-math.pi, math.pi, n), rng.uniform(-2.0, 2.0, n)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
