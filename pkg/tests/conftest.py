import numpy as np
import pytest

from vsheet import domain as dom
from vsheet import kirchhoff_routh as kr
from vsheet import solver as so

# Positive root of a⁴ + 4a² − 1 = 0: the symmetric (±a, 0) critical point
# of W_2 in the unit disk with κ = (1, −1).
PAIR_A = float(np.sqrt(np.sqrt(5.0) - 2.0))


@pytest.fixture(scope="session")
def disk_pair():
    return kr.VortexConfig([[-PAIR_A, 0.0], [PAIR_A, 0.0]], [1.0, -1.0])


@pytest.fixture(scope="session")
def disk_single_traces():
    """Disk, m=1, κ=1 at the origin, ε=0.05, τ ∈ {−0.1, 0, 0.1}."""
    x0 = kr.VortexConfig([[0.0, 0.0]], [1.0])
    return {tau: so.solve_at(dom.DISK, x0, 0.05, tau, so.SolveOptions(N=128, tau=tau)) for tau in (-0.1, 0.0, 0.1)}


@pytest.fixture(scope="session")
def disk_pair_traces(disk_pair):
    return [so.solve_at(dom.DISK, disk_pair, eps, 0.0, so.SolveOptions(N=128)) for eps in (0.01, 0.02, 0.04)]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
