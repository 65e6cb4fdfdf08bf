import random

import numpy as np
import pytest

from rectfec.codec import CodeGrid
from rectfec.core import ErrorConfiguration, Status

# 21 errors in three components (2x2, 2x3 and 3x5 row/column blocks), every
# error sharing its row and its column with another one.
THREE_CLUSTER_CELLS = (
    [(0, 0), (0, 1), (1, 0), (1, 1)]
    + [(i, j) for i in (2, 3) for j in (2, 3, 4)]
    + [(4, 5), (4, 6), (4, 8), (4, 9), (5, 5), (5, 7), (5, 8), (5, 9), (6, 6), (6, 7), (6, 9)]
)


@pytest.fixture
def three_cluster_config():
    return ErrorConfiguration.from_cells(9, 9, THREE_CLUSTER_CELLS)


def random_config(rng, n, m, p=None):
    p = rng.random() if p is None else p
    mask = rng.random((n + 1, m + 1)) < p
    return ErrorConfiguration.from_mask(mask)


def randomized_peel(config, rng):
    """Peel by repeatedly picking a random isolated error (test oracle)."""
    left = set(config.errors)
    while True:
        rows, cols = {}, {}
        for i, j in left:
            rows[i] = rows.get(i, 0) + 1
            cols[j] = cols.get(j, 0) + 1
        isolated = sorted(c for c in left if rows[c[0]] == 1 or cols[c[1]] == 1)
        if not isolated:
            return frozenset(left)
        left.discard(isolated[rng.randrange(len(isolated))])


class ScriptedChannel:
    """Erases a given list of cells on each successive transmission."""

    def __init__(self, script):
        self.script = list(script)
        self.calls = 0

    def transmit(self, grid: CodeGrid, stream_id=0) -> CodeGrid:
        cells = self.script[self.calls] if self.calls < len(self.script) else []
        self.calls += 1
        out = grid.copy()
        for i, j in cells:
            assert out.sent[i, j], f"scripted erasure on unsent cell {(i, j)}"
            out.status[i, j] = Status.ERASED
            out.payload[i, j] = 0
        return out


@pytest.fixture
def py_rng():
    return random.Random(1234)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
