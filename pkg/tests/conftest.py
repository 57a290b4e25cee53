import numpy as np
import pytest

from graybox import MkLandscape, Subfunction, build_vig

EXAMPLE_SUBS = [
    (0, 6, 14), (1, 0, 6), (2, 1, 6), (3, 7, 13), (4, 1, 14), (5, 4, 2),
    (6, 10, 13), (7, 12, 15), (8, 3, 6), (9, 11, 14), (10, 2, 17), (11, 16, 17),
    (12, 10, 17), (13, 12, 15), (14, 4, 16), (15, 7, 13), (16, 9, 11), (17, 5, 2),
]
RED = "000000000000000000"
BLUE = "111101011101110110"

APX_EDGES = [(3, 6), (6, 4), (4, 1), (6, 5), (4, 5), (2, 5)]


def example_landscape(seed=0, Q=100):
    rng = np.random.default_rng(seed)
    subs = [Subfunction.from_table(v, rng.integers(0, Q, 8)) for v in EXAMPLE_SUBS]
    return MkLandscape(18, subs, name="example18")


def apx_landscape(seed=0, Q=100):
    """Pairwise subfunctions on the edges of a 7-variable graph with three articulation points (variable 0 unused)."""
    rng = np.random.default_rng(seed)
    subs = [Subfunction.from_table(e, rng.integers(0, Q, 4)) for e in APX_EDGES]
    return MkLandscape(7, subs, name="apx7")


@pytest.fixture
def example18():
    land = example_landscape()
    return land, build_vig(land)


@pytest.fixture
def apx7():
    land = apx_landscape()
    x = np.zeros(7, dtype=np.uint8)
    y = np.array([0, 1, 1, 1, 1, 1, 1], dtype=np.uint8)
    return land, build_vig(land), x, y


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
