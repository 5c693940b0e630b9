import numpy as np
import pytest

from crackscat.configurations import three_cracks, three_cracks_initial, wavy_crack, wavy_crack_initial
from crackscat.forward import ForwardSystem


@pytest.fixture(scope="session")
def example_a():
    return three_cracks()


@pytest.fixture(scope="session")
def example_a_initial():
    return three_cracks_initial()


@pytest.fixture(scope="session")
def example_b():
    return wavy_crack()


@pytest.fixture(scope="session")
def example_b_initial():
    return wavy_crack_initial()


@pytest.fixture(scope="session")
def sol_a(example_a):
    return ForwardSystem(example_a, 64, 3.0).solve(np.array([1.0, 0.0]))


@pytest.fixture(scope="session")
def sol_b(example_b):
    return ForwardSystem(example_b, 64, 3.0).solve(np.array([1.0, 0.0]))


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, detail)``; the lines are printed in the summary."""
    lines = request.config.stash[ACCEPTANCE]

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
