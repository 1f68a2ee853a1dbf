import numpy as np
import pytest

from twinlab import BipartiteDensity, PureBipartiteState

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)
Z_UP = np.outer(UP, UP)
Z_DOWN = np.outer(DOWN, DOWN)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def measured_singlet_matrix():
    """Singlet after an ideal s_z measurement on particle 1."""
    return 0.5 * (np.kron(Z_UP, Z_DOWN) + np.kron(Z_DOWN, Z_UP))


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def measured_singlet():
    return BipartiteDensity(2, 2, measured_singlet_matrix())


@pytest.fixture
def bell_state():
    return PureBipartiteState(2, 2, BELL)


@pytest.fixture
def bell_density():
    return BipartiteDensity(2, 2, np.outer(BELL, BELL.conj()))


# acceptance criteria report one line each in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
