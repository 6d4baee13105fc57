import logging
import random
from typing import Optional

import networkx as nx

from config import DEFAULT_SEED, GENERATOR_KINDS
from services.graph_core import Graph

logger = logging.getLogger(__name__)


def _to_graph(nxg: nx.Graph, n_off: int, seed: int) -> Graph:
    nxg = nx.convert_node_labels_to_integers(nxg, ordering="sorted")
    n = nxg.number_of_nodes()
    if not 0 <= n_off <= n:
        raise ValueError(f"n_off must lie in [0, {n}], got {n_off}")
    off = set(random.Random(seed).sample(range(n), n_off))
    on_state = [v not in off for v in range(n)]
    return Graph.from_edges(n, nxg.edges(), on_state)


def generate_graph(kind: str, n: int, m: Optional[int] = None, n_off: int = 0, seed: int = DEFAULT_SEED) -> Graph:
    """Deterministic graph of the given kind; n_off vertices chosen by the seed start off"""
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown graph kind {kind!r}; expected one of {', '.join(GENERATOR_KINDS)}")
    if n < 0:
        raise ValueError("n must be non-negative")

    if kind == "gnm":
        if m is None:
            raise ValueError("gnm needs m")
        if m > n * (n - 1) // 2:
            raise ValueError(f"gnm: m = {m} exceeds n(n-1)/2 for n = {n}")
        nxg = nx.gnm_random_graph(n, m, seed=seed)
    elif kind == "path":
        nxg = nx.path_graph(n)
    elif kind == "star":
        if n < 1:
            raise ValueError("star needs n >= 1")
        nxg = nx.star_graph(n - 1)
    elif kind == "grid":
        cols = m if m is not None else n
        if n < 1 or cols < 1:
            raise ValueError("grid needs positive rows and columns")
        nxg = nx.grid_2d_graph(n, cols)
    else:
        if n < 2:
            raise ValueError("cliques-bridge needs n >= 2")
        half = n // 2
        nxg = nx.disjoint_union(nx.complete_graph(half), nx.complete_graph(n - half))
        nxg.add_edge(half - 1, half)

    graph = _to_graph(nxg, n_off, seed)
    logger.info(f"generated {kind}: n={graph.n} m={graph.edge_count} n_off={graph.n_off} seed={seed}")
    return graph
