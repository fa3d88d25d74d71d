import random

import pytest

from shellforest.graph import WeightedGraph

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_graph(rng: random.Random, n: int, m: int, max_cost: int = 9) -> WeightedGraph:
    """Connected: random spanning tree plus random extra edges."""
    edges = {}
    for v in range(1, n):
        edges[(rng.randrange(v), v)] = rng.randint(1, max_cost)
    m = min(m, n * (n - 1) // 2)
    while len(edges) < m:
        u, v = sorted(rng.sample(range(n), 2))
        edges.setdefault((u, v), rng.randint(1, max_cost))
    return WeightedGraph(n, [(u, v, c) for (u, v), c in sorted(edges.items())])


@pytest.fixture
def rng():
    return random.Random(12345)
