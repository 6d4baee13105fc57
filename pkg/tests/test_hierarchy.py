import math
from fractions import Fraction

import pytest

from services.generators import generate_graph
from services.graph_core import VertexSet, connected_components, induced_subgraph
from services.hierarchy import build_hierarchy, sf_decomp, steiner_phi, validate_hierarchy


def assert_sf_contract(g, terminals, eps, result):
    terminals = VertexSet(terminals)
    separator = result.separator
    assert len(separator) <= eps * len(terminals)
    remaining = [v for v in range(g.n) if v not in separator]
    claimed = {}
    for k, tree in enumerate(result.trees):
        for v in tree:
            assert v not in separator
            assert v not in claimed
            claimed[v] = k
        for v, p in tree.items():
            if p is not None:
                assert g.has_edge(v, p)
    for part in connected_components(g, remaining):
        inside = [v for v in part if v in terminals]
        if not inside:
            continue
        owners = {claimed.get(v) for v in inside}
        assert len(owners) == 1 and None not in owners
        assert set(result.trees[owners.pop()]) <= set(part)


def test_phi_is_rational_and_clamped():
    assert steiner_phi(Fraction(1, 2), 2) == Fraction(1, 8)
    assert steiner_phi(Fraction(1, 2), 16) == Fraction(1, 16)
    assert steiner_phi(Fraction(1, 2), 17) == Fraction(1, 20)


def test_single_terminal(path_graph):
    result = sf_decomp(path_graph(3), VertexSet([1]), Fraction(1, 2))
    assert len(result.separator) == 0
    assert result.trees == [{1: None}]


def test_two_isolated_terminals(make_graph):
    result = sf_decomp(make_graph(2, []), VertexSet([0, 1]), Fraction(1, 2))
    assert len(result.separator) == 0
    assert sorted(result.trees, key=lambda t: min(t)) == [{0: None}, {1: None}]


def test_two_terminals_joined_by_a_path(path_graph):
    result = sf_decomp(path_graph(4), VertexSet([0, 3]), Fraction(1, 2))
    assert len(result.separator) == 0
    assert len(result.trees) == 1
    assert set(result.trees[0]) == {0, 1, 2, 3}


@pytest.mark.parametrize("n", [5, 16])
def test_path_contract(path_graph, n):
    g = path_graph(n)
    result = sf_decomp(g, VertexSet(range(n)), Fraction(1, 2))
    assert_sf_contract(g, range(n), Fraction(1, 2), result)


@pytest.mark.parametrize("seed", range(6))
def test_random_graph_contract(random_graph, seed):
    g = random_graph(20, 30, seed=seed)
    terminals = VertexSet(range(0, 20, 3))
    result = sf_decomp(g, terminals, Fraction(1, 2))
    assert_sf_contract(g, terminals, Fraction(1, 2), result)


def test_empty_graph_has_an_empty_hierarchy(make_graph):
    h = build_hierarchy(make_graph(0, []))
    assert h.components == [] and h.trees == [] and h.levels == 0


def test_single_vertex(make_graph):
    g = make_graph(1, [])
    h = build_hierarchy(g)
    assert h.levels == 1
    assert len(h.components) == 1 and h.components[0].vertices == {0}
    assert h.trees[0].parent == {0: None}
    assert validate_hierarchy(g, h) == []


def test_star_hierarchy(make_graph):
    g = make_graph(9, [(0, v) for v in range(1, 9)])
    h = build_hierarchy(g)
    assert validate_hierarchy(g, h) == []
    assert h.levels <= math.ceil(math.log2(9)) + 1


def test_hierarchy_on_an_induced_subgraph_uses_original_ids(path_graph):
    g = path_graph(8, off=[0, 4])
    g_on = induced_subgraph(g, g.on_vertices())
    h = build_hierarchy(g_on)
    assert validate_hierarchy(g_on, h) == []
    assert set(h.chain) == {1, 2, 3, 5, 6, 7}
    tops = sorted(sorted(c.vertices) for c in h.components if c.parent is None)
    assert tops == [[1, 2, 3], [5, 6, 7]]


@pytest.mark.parametrize("seed", range(8))
def test_random_hierarchies_are_valid(random_graph, seed):
    g = random_graph(24, 24 + 4 * seed, seed=seed)
    h = build_hierarchy(g)
    assert validate_hierarchy(g, h) == []
    for part in connected_components(g):
        assert max(len(h.chain[v]) for v in part) <= math.ceil(math.log2(len(part))) + 1
    for v, chain in h.chain.items():
        levels = [h.components[c].level for c in chain]
        assert levels == list(range(levels[0], levels[0] + len(levels)))
        assert v in h.components[chain[0]].terminals


def test_moving_a_vertex_between_siblings_is_caught(make_graph):
    g = make_graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    h = build_hierarchy(g)
    first, second = [c for c in h.components if c.parent is None]
    first.vertices = first.vertices - [2]
    second.vertices = second.vertices | [2]
    assert validate_hierarchy(g, h)


def test_cutting_a_tree_is_caught(path_graph):
    g = path_graph(10)
    h = build_hierarchy(g)
    tree = next(t for t in h.trees if len(t.parent) > 1)
    child = next(v for v, p in tree.parent.items() if p is not None)
    tree.parent[child] = None
    assert validate_hierarchy(g, h)


def test_dump_lists_every_level(path_graph):
    h = build_hierarchy(path_graph(6))
    text = h.dump()
    for level in range(1, h.levels + 1):
        assert f"level {level}" in text


@pytest.mark.parametrize(
    "kind, n, m, seed",
    [
        ("gnm", 40, 60, 0),
        ("gnm", 80, 160, 1),
        ("gnm", 120, 200, 2),
        ("grid", 6, 6, 3),
        ("grid", 4, 10, 4),
        ("cliques-bridge", 16, None, 5),
        ("star", 20, None, 6),
    ],
)
def test_decomposition_charging_and_depth(kind, n, m, seed):
    g = generate_graph(kind, n, m, seed=seed)
    terminals = VertexSet(range(g.n))
    eps = Fraction(1, 2)
    eps_half = eps / 2
    result = sf_decomp(g, terminals, eps)
    stats = result.stats
    assert stats.dropped_total <= eps_half * len(terminals)
    assert stats.cut_total <= eps_half * len(terminals)
    assert len(result.separator) <= eps * len(terminals)
    assert stats.depth <= 2 * (3 * math.log2(len(terminals)) / eps_half + 2)
    assert_sf_contract(g, terminals, eps, result)
