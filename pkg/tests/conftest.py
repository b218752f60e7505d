import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hullwrap import PointCloud, generate_cloud  # noqa: E402

TETRA = np.array([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)])
CUBE = np.array(list(itertools.product((0.0, 1.0), repeat=3)))


@pytest.fixture
def tetra():
    return PointCloud(TETRA)


@pytest.fixture
def cube_center():
    """Unit cube corners plus the centre (id 8)."""
    return PointCloud(np.vstack([CUBE, [(0.5, 0.5, 0.5)]]))


@pytest.fixture(scope="session")
def ball50():
    return generate_cloud("ball-uniform(50,7)")


@pytest.fixture(scope="session")
def ball500():
    return generate_cloud("ball-uniform(500,7)")


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
