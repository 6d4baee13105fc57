import random
from typing import Iterable, Sequence, Tuple

import pytest

from services.generators import generate_graph
from services.graph_core import Graph


@pytest.fixture
def make_graph():
    """Build a Graph from an edge list; ``off`` lists the initially inactive vertices"""

    def _make(n: int, edges: Iterable[Tuple[int, int]], off: Sequence[int] = ()) -> Graph:
        off_set = set(off)
        return Graph.from_edges(n, edges, [v not in off_set for v in range(n)])

    return _make


@pytest.fixture
def path_graph(make_graph):
    def _path(n: int, off: Sequence[int] = ()) -> Graph:
        return make_graph(n, [(i, i + 1) for i in range(n - 1)], off)

    return _path


@pytest.fixture
def random_graph():
    """Seeded G(n, m) with n_off vertices off"""

    def _random(n: int, m: int, n_off: int = 0, seed: int = 0) -> Graph:
        m = min(m, n * (n - 1) // 2)
        return generate_graph("gnm", n, m, n_off, seed)

    return _random


@pytest.fixture
def fuzz_corpus():
    """Small graphs of several shapes with varied on/off splits"""
    graphs = []
    rng = random.Random(7)
    for seed in range(6):
        n = rng.randint(5, 24)
        m = rng.randint(n - 1, 2 * n)
        for n_off in (0, n // 4, n // 2):
            graphs.append(generate_graph("gnm", n, min(m, n * (n - 1) // 2), n_off, seed))
    graphs.append(generate_graph("path", 12, n_off=3, seed=1))
    graphs.append(generate_graph("star", 9, n_off=2, seed=2))
    graphs.append(generate_graph("grid", 4, 4, n_off=4, seed=3))
    graphs.append(generate_graph("cliques-bridge", 12, n_off=2, seed=4))
    return graphs
