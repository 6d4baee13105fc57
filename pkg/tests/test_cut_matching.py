import math
from fractions import Fraction

import pytest

import services.cut_matching as game
from config import ROUND_CAP_FACTOR
from services.cut_matching import (
    Matching, cut_is_separating, cut_or_steiner_tree, matching_player, partition_clusters, round_cap,
    tree_degrees, tree_edges
)
from services.errors import InvalidPartitionError, RoundLimitError
from services.flow import VertexCut
from services.graph_core import VertexSet, connected_components


def _complete_bipartite(make_graph):
    return make_graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


def assert_game_contract(g, terminals, eps, phi, result):
    terminals = VertexSet(terminals)
    assert result.stats.rounds <= round_cap(len(terminals))
    if result.is_cut:
        cut = result.cut
        assert cut_is_separating(g, cut)
        left_u, right_u = len(cut.left & terminals), len(cut.right & terminals)
        assert right_u >= left_u
        assert 3 * left_u >= eps * len(terminals)
        assert len(cut.separator) <= phi * left_u
        return
    assert len(result.dropped) <= eps * len(terminals)
    tree = result.tree
    roots = [v for v, p in tree.items() if p is None]
    assert len(roots) == 1
    for u, v in tree_edges(tree):
        assert g.has_edge(u, v)
    for v in terminals:
        assert (v in tree) != (v in result.dropped)
    degrees = tree_degrees(tree)
    bound = 2 * max(result.stats.rounds, 1) * -(-1 // phi)
    assert max(degrees.values(), default=0) <= bound


def test_matching_on_complete_bipartite(make_graph):
    g = _complete_bipartite(make_graph)
    result = matching_player(g, VertexSet(range(4)), Fraction(1), VertexSet([0, 1]), VertexSet([2, 3]))
    assert isinstance(result, Matching)
    assert len(result) == 2
    assert {a for a, _ in result.pairs} == {0, 1}
    assert {b for _, b in result.pairs} == {2, 3}
    for path in result.paths:
        assert len(path) == 2


def test_matching_routes_through_a_middle_vertex(path_graph):
    g = path_graph(3)
    result = matching_player(g, VertexSet([0, 2]), Fraction(1, 2), VertexSet([0]), VertexSet([2]))
    assert isinstance(result, Matching)
    assert result.pairs == [(0, 2)]
    assert result.paths == [[0, 1, 2]]
    assert result.embedding_edges == {(0, 1), (1, 2)}


def test_isolated_terminals_yield_an_empty_cut(make_graph):
    g = make_graph(2, [])
    result = matching_player(g, VertexSet([0, 1]), Fraction(1), VertexSet([0]), VertexSet([1]))
    assert isinstance(result, VertexCut)
    assert len(result.separator) == 0
    assert result.left == {0}
    assert result.right == {1}


def test_matching_player_rejects_bad_partitions(path_graph):
    g = path_graph(4)
    terminals = VertexSet(range(4))
    with pytest.raises(InvalidPartitionError):
        matching_player(g, terminals, Fraction(1), VertexSet([0, 1]), VertexSet([1, 2, 3]))
    with pytest.raises(InvalidPartitionError):
        matching_player(g, terminals, Fraction(1), VertexSet([0]), VertexSet([1, 2]))
    with pytest.raises(InvalidPartitionError):
        matching_player(g, terminals, Fraction(2), VertexSet([0, 1]), VertexSet([2, 3]))


def test_partition_singletons_alternate():
    decision = partition_clusters([[0], [1], [2], [3]], 4, Fraction(1, 4))
    assert decision.kind == "a"
    assert decision.a_side == [0, 2]
    assert decision.b_side == [1, 3]


def test_partition_isolates_a_majority_cluster():
    decision = partition_clusters([[0, 1, 2], [3]], 4, Fraction(1, 8))
    assert decision.kind == "b"
    assert decision.a_side == [3]
    assert decision.b_side == [0, 1, 2]


def test_partition_reports_a_giant_cluster():
    decision = partition_clusters([[0, 1, 2, 3]], 4, Fraction(1, 4))
    assert decision.kind == "giant"
    assert decision.giant == [0, 1, 2, 3]


def test_single_terminal_is_its_own_tree(path_graph):
    result = cut_or_steiner_tree(path_graph(3), VertexSet([1]), Fraction(1, 4), Fraction(1, 4))
    assert not result.is_cut
    assert result.tree == {1: None}
    assert len(result.dropped) == 0


def test_path_terminals_form_a_tree(path_graph):
    g = path_graph(8)
    eps = phi = Fraction(1, 4)
    result = cut_or_steiner_tree(g, VertexSet(range(8)), eps, phi)
    assert_game_contract(g, range(8), eps, phi, result)
    assert not result.is_cut
    assert max(tree_degrees(result.tree).values()) <= 2
    assert result.stats.rounds >= 1
    assert result.stats.max_congestion <= result.stats.rounds * 4


def test_disjoint_cliques_end_in_an_empty_cut(make_graph):
    g = make_graph(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    eps = phi = Fraction(1, 4)
    result = cut_or_steiner_tree(g, VertexSet(range(6)), eps, phi)
    assert result.is_cut
    assert len(result.cut.separator) == 0
    assert {result.cut.left.members, result.cut.right.members} == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}


def test_bridged_cliques_form_a_tree(make_graph):
    edges = [(u, v) for u in range(6) for v in range(u + 1, 6)]
    edges += [(u, v) for u in range(6, 12) for v in range(u + 1, 12)]
    edges.append((5, 6))
    g = make_graph(12, edges)
    eps, phi = Fraction(1, 4), Fraction(1, 400)
    result = cut_or_steiner_tree(g, VertexSet(range(12)), eps, phi)
    assert_game_contract(g, range(12), eps, phi, result)
    assert not result.is_cut


@pytest.mark.parametrize("seed", range(8))
def test_contract_on_random_graphs(random_graph, seed):
    g = random_graph(14, 20, seed=seed)
    terminals = VertexSet(range(0, 14, 2))
    eps, phi = Fraction(1, 4), Fraction(1, 12)
    result = cut_or_steiner_tree(g, terminals, eps, phi)
    assert_game_contract(g, terminals, eps, phi, result)
    if not result.is_cut:
        kept = [v for v in terminals if v not in result.dropped]
        assert len(connected_components(g, result.tree.keys())) == 1
        assert set(kept) <= set(result.tree)
    assert len(result.stats.potential) <= result.stats.rounds


@pytest.mark.parametrize("seed", range(10))
def test_matching_player_contract_on_random_graphs(random_graph, seed):
    g = random_graph(16, 16 + 2 * seed, seed=seed)
    terminals = VertexSet(range(0, 16, 2))
    a_side, b_side = VertexSet([0, 2, 4, 6]), VertexSet([8, 10, 12, 14])
    phi = Fraction(1, 4)
    result = matching_player(g, terminals, phi, a_side, b_side)
    smaller = min(len(a_side), len(b_side))
    if isinstance(result, VertexCut):
        assert cut_is_separating(g, result)
        left_u, right_u = len(result.left & terminals), len(result.right & terminals)
        assert right_u >= left_u
        assert 3 * left_u >= smaller
        assert len(result.separator) <= phi * left_u
        return
    assert 3 * len(result) >= smaller
    load = {}
    for (a, b), path in zip(result.pairs, result.paths):
        assert a in a_side and b in b_side
        assert path[0] == a and path[-1] == b
        for x, y in zip(path, path[1:]):
            assert g.has_edge(x, y)
        for v in path:
            load[v] = load.get(v, 0) + 1
    assert max(load.values()) <= math.ceil(1 / phi)


def test_round_cap_grows_with_the_terminal_count():
    assert round_cap(1) >= 1
    assert round_cap(64) == math.ceil(ROUND_CAP_FACTOR * math.log2(66))
    assert round_cap(64) <= round_cap(1024)


def test_game_stops_at_the_round_cap(path_graph, monkeypatch):
    monkeypatch.setattr(game, "ROUND_CAP_FACTOR", 0)
    with pytest.raises(RoundLimitError):
        cut_or_steiner_tree(path_graph(8), VertexSet(range(8)), Fraction(1, 4), Fraction(1, 4))
