import numpy as np
import pytest

from halfcavity import ModelParams


@pytest.fixture
def params():
    def make(gtd, phi, gamma=1.0):
        return ModelParams.from_dimensionless(gtd, phi, gamma)

    return make


VALIDATION_GTD = (0.1, 1.0, 2.0, 5.0, 20.0)
VALIDATION_PHI = (0.0, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
