import sys

import pytest

from nslab import presets
from nslab.solver import run


@pytest.fixture(scope="session")
def forced_traj():
    return run(presets.forced_config())


@pytest.fixture(scope="session")
def random_traj():
    return run(presets.random_config())


@pytest.fixture(scope="session")
def tg_traj():
    return run(presets.taylor_green_config(n=32))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
