import itertools

import numpy as np
import pytest

from motifboot.graph import Graph


def er_graph(n, p, rng):
    a = np.triu(rng.random((n, n)) < p, 1)
    return Graph.from_adjacency(a | a.T)


def cycle_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return Graph.from_edges(n, list(itertools.combinations(range(n), 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
