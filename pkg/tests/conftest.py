import numpy as np
import pytest

from schottky.groups import Circle, build_from_circles, symmetric_spec

ACCEPTANCE_LINES = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def skewed_spec(s: float, genus: int = 2):
    """Far-separated classical spec with no central symmetry (keeps period terms off the log cut)."""
    pairs = [
        (Circle(-s, 1.0), Circle(s, 1.0)),
        (Circle(0.3 * s - 1j * s, 1.0), Circle(0.1 * s + 0.8j * s, 0.7)),
    ]
    if genus == 3:
        pairs.append((Circle(-0.6 * s - 0.7j * s, 0.8), Circle(0.6 * s + 0.75j * s, 1.1)))
    return build_from_circles(pairs)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session")
def sym50():
    return symmetric_spec(50.0)


@pytest.fixture(scope="session")
def genus1_spec():
    return build_from_circles([(Circle(-3, 1), Circle(3, 1))])
