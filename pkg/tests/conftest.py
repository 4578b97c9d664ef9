import pathlib
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(pathlib.Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

from tunneltime import PacketSpec, rectangular  # noqa: E402
from tunneltime.cli import load_config, run_scan  # noqa: E402
from tunneltime.propagator import GridConfig, run  # noqa: E402

M_EFF = 0.067
V0 = 0.3
E0 = 0.02
D = 5.0
FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# Reference grid run: opaque enough to separate the channels, small enough
# to finish in about a minute on 64k points.
ORACLE_L0 = 10.0
ORACLE_A = 150.0
ORACLE_T_MAX = 3000.0
ORACLE_GRID = GridConfig(dx=0.1, dt=0.2)


@pytest.fixture(scope="session")
def oracle_spec():
    return PacketSpec.from_energy(E0, ORACLE_L0, M_EFF)


@pytest.fixture(scope="session")
def oracle_barrier():
    return rectangular(V0, ORACLE_A, D)


@pytest.fixture(scope="session")
def oracle_run(oracle_spec, oracle_barrier):
    return run(oracle_spec, oracle_barrier, ORACLE_T_MAX, 10.0, ORACLE_GRID)


@pytest.fixture(scope="session")
def fig1_rows():
    return run_scan(load_config(preset="fig1"), threads=4)


@pytest.fixture(scope="session")
def fig5_rows():
    return run_scan(load_config(preset="fig5"), threads=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, collected by test_acceptance and printed
# at the end of the run so they show without -s
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
