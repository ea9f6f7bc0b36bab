import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sbsloco.leg_reference import hip_positions  # noqa: E402
from sbsloco.srbd_model import RobotModel  # noqa: E402


@pytest.fixture
def model():
    return RobotModel()


@pytest.fixture
def hover(model):
    """Standing state with all feet under the hips and weight shared evenly."""
    x = np.zeros(12)
    x[2] = model.nominal_height
    feet = hip_positions(x[0:3], 0.0, model.hip_offsets)
    grf = np.zeros((4, 3))
    grf[:, 2] = model.weight / 4
    return x, grf, np.ones(4, dtype=bool), feet


def random_state(rng, tilt=0.4, rate=1.5):
    x = np.zeros(12)
    x[0:3] = rng.uniform(-0.2, 0.2, 3) + [0, 0, 0.3]
    x[3:6] = rng.uniform(-1, 1, 3)
    x[6:8] = rng.uniform(-tilt, tilt, 2)
    x[8] = rng.uniform(-np.pi, np.pi)
    x[9:12] = rng.uniform(-rate, rate, 3)
    return x


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
