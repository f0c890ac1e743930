import sys
import numpy as np
import pytest

from gapalign.scoring import ScoringMatrix


def random_letters(rng, size):
    return np.where(rng.random(size) < 0.5, 1.0, -1.0)


# ten matrices: basis elements, LCS, the min-score example, gap penalties, random
TEST_MATRICES = [
    ScoringMatrix(1, 1, 1, 0.5, 0.5),
    ScoringMatrix(1, 0, -1, 0.5, -0.5),
    ScoringMatrix(1, -1, 1, 0, 0),
    ScoringMatrix(1, 0, 1, 0, 0),
    ScoringMatrix(1, 0, -1, 0, 0),
    ScoringMatrix(2, -1, 2, -1, -1),
    ScoringMatrix(1, -3, 0.5, -2, -0.5),
    ScoringMatrix(0.25, 1.5, -2, 0.75, 0),
    ScoringMatrix(-1, 2, -1, 1, 1),
    ScoringMatrix(3, 0.5, 1, -0.25, -1.75),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
