import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qudit_sim import ApertureSpec, ChannelGeometry
from qudit_sim.config import ExperimentConfig
from qudit_sim.pipeline import Pipeline

MM = 1e-3
_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record one acceptance line; it is echoed now and in the final summary."""
    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[_ACCEPTANCE].append(line)
        print(line)
        return ok
    return _report


@pytest.fixture(scope="session")
def geom():
    return ChannelGeometry.two_f(826e-9, 0.2, 0.15)


@pytest.fixture(scope="session")
def slits4():
    return ApertureSpec.multi_slit(4, 0.17 * MM, 0.045 * MM)


@pytest.fixture(scope="session")
def pipe():
    return Pipeline(ExperimentConfig())


@pytest.fixture(scope="session")
def image_amp(pipe):
    return pipe.detectors(0.0, 0.0)


@pytest.fixture(scope="session")
def fringe_amp(pipe):
    return pipe.detectors(0.2, 0.2)


@pytest.fixture(scope="session")
def classical_fringe_grid(pipe):
    return pipe.classical_grid(0.2, 0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
