import itertools
import random

import pytest

from services.errors import FlowError
from services.flow import (
    FlowNetwork, IntegralFlow, congestion, decompose_flow_paths, max_flow_vertex_capacitated
)


def _separates(net: FlowNetwork, removed) -> bool:
    adjacency = {v: set() for v in range(net.n)}
    for u, v in net.edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    seen = {net.source}
    stack = [net.source]
    while stack:
        x = stack.pop()
        for y in adjacency[x]:
            if y not in seen and y not in removed:
                seen.add(y)
                stack.append(y)
    return net.sink not in seen


def _brute_min_cut(net: FlowNetwork) -> int:
    inner = [v for v in range(net.n) if v not in (net.source, net.sink)]
    best = None
    for size in range(len(inner) + 1):
        for chosen in itertools.combinations(inner, size):
            if _separates(net, set(chosen)):
                cost = sum(net.capacity[v] for v in chosen)
                best = cost if best is None else min(best, cost)
    return best


def test_chain_cut_picks_the_cheaper_vertex():
    # s - a - b - t with c(a) = 3, c(b) = 1
    net = FlowNetwork(4, 0, 3, [(0, 1), (1, 2), (2, 3)], [None, 3, 1, None])
    flow, cut = max_flow_vertex_capacitated(net)
    assert flow.value == 1
    assert cut.separator == {2}
    assert cut.left == {1}
    assert len(cut.right) == 0


def test_two_disjoint_routes():
    net = FlowNetwork(4, 0, 3, [(0, 1), (1, 3), (0, 2), (2, 3)], [None, 1, 1, None])
    flow, cut = max_flow_vertex_capacitated(net)
    assert flow.value == 2
    assert cut.separator == {1, 2}


def test_disconnected_terminals_give_an_empty_cut():
    net = FlowNetwork(4, 0, 3, [(0, 1), (2, 3)], [None, 1, 1, None])
    flow, cut = max_flow_vertex_capacitated(net)
    assert flow.value == 0
    assert len(cut.separator) == 0
    assert cut.left == {1}
    assert cut.right == {2}


@pytest.mark.parametrize(
    "net",
    [
        FlowNetwork(3, 0, 1, [(0, 1)], [None, None, 1]),
        FlowNetwork(3, 0, 2, [(0, 1), (1, 2)], [None, 0, None]),
        FlowNetwork(3, 0, 2, [(0, 1), (1, 2)], [None, None, None]),
        FlowNetwork(3, 0, 0, [(0, 1)], [None, 1, 1]),
    ],
)
def test_invalid_networks_are_rejected(net):
    with pytest.raises(FlowError):
        max_flow_vertex_capacitated(net)


@pytest.mark.parametrize("seed", range(12))
def test_flow_value_matches_brute_force_min_cut(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 8)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) != (0, n - 1)]
    edges = rng.sample(pairs, rng.randint(n - 1, len(pairs)))
    capacity = [None] + [rng.randint(1, 3) for _ in range(n - 2)] + [None]
    net = FlowNetwork(n, 0, n - 1, edges, capacity)

    flow, cut = max_flow_vertex_capacitated(net)
    assert flow.value == _brute_min_cut(net)
    assert sum(capacity[v] for v in cut.separator) == flow.value
    assert _separates(net, set(cut.separator))

    paths = decompose_flow_paths(net, flow)
    assert len(paths) == flow.value
    for path in paths:
        assert path.nodes[0] == 0 and path.nodes[-1] == n - 1
        assert len(set(path.nodes)) == len(path.nodes)
    for v, load in congestion(paths).items():
        assert load <= capacity[v]


def test_decomposition_drops_cycles():
    # one unit s -> 1 -> t plus a circulation 1 -> 2 -> 3 -> 1
    net = FlowNetwork(5, 0, 4, [(0, 1), (1, 4), (1, 2), (2, 3), (3, 1)], [None, 2, 1, 1, None])
    flow = IntegralFlow(
        value=1,
        arc_flow={(0, 1): 1, (1, 2): 1, (2, 3): 1, (3, 1): 1, (1, 4): 1},
        throughput=[0, 2, 1, 1, 0],
    )
    paths = decompose_flow_paths(net, flow)
    assert [p.nodes for p in paths] == [[0, 1, 4]]


def test_decomposition_rejects_broken_conservation():
    net = FlowNetwork(3, 0, 2, [(0, 1), (1, 2)], [None, 1, None])
    flow = IntegralFlow(value=1, arc_flow={(0, 1): 1}, throughput=[0, 1, 0])
    with pytest.raises(FlowError):
        decompose_flow_paths(net, flow)


def test_decomposition_rejects_over_capacity():
    net = FlowNetwork(3, 0, 2, [(0, 1), (1, 2)], [None, 1, None])
    flow = IntegralFlow(value=2, arc_flow={(0, 1): 2, (1, 2): 2}, throughput=[0, 2, 0])
    with pytest.raises(FlowError):
        decompose_flow_paths(net, flow)
