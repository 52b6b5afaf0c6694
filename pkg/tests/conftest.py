import sys

import numpy as np
import pytest
from hypothesis import settings

from cellinterf.stochastic_net import ChannelParams, NetworkConfig

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def cell():
    """Reference cell: 150 m radius, alpha 3, no shadowing, field out to 10 radii."""
    ch = ChannelParams(3.0, -72.3, 0.0)
    net = NetworkConfig.from_cell_radius(150.0, 1.0, r_max=1500.0)
    return ch, net


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = [mod.RESULTS[k] for k in sorted(mod.RESULTS)] if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
