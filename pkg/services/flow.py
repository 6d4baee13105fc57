import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from services.errors import FlowError
from services.graph_core import VertexSet

logger = logging.getLogger(__name__)

Arc = Tuple[int, int]


@dataclass
class FlowNetwork:
    """Undirected network on nodes [0, n) with vertex capacities.

    ``capacity[v] is None`` means infinite; only the source and sink may
    be infinite.
    """

    n: int
    source: int
    sink: int
    edges: List[Arc]
    capacity: List[Optional[int]]

    def validate(self) -> None:
        if len(self.capacity) != self.n:
            raise FlowError("capacity must have one entry per node")
        if not (0 <= self.source < self.n and 0 <= self.sink < self.n) or self.source == self.sink:
            raise FlowError("source and sink must be distinct nodes")
        for v, c in enumerate(self.capacity):
            if v in (self.source, self.sink):
                if c is not None:
                    raise FlowError("source and sink must have infinite capacity")
            elif c is None:
                raise FlowError(f"node {v} has infinite capacity but is not a terminal")
            elif c < 1:
                raise FlowError(f"node {v} has capacity {c}, expected >= 1")
        terminals = {self.source, self.sink}
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise FlowError(f"bad edge ({u}, {v})")
            if {u, v} == terminals:
                raise FlowError("source and sink are adjacent")

    def finite_total(self) -> int:
        return sum(c for c in self.capacity if c is not None)


@dataclass
class IntegralFlow:
    """Net flow per directed arc (only positive entries kept) and per-node throughput"""

    value: int
    arc_flow: Dict[Arc, int] = field(default_factory=dict)
    throughput: List[int] = field(default_factory=list)


@dataclass
class VertexCut:
    left: VertexSet
    separator: VertexSet
    right: VertexSet


@dataclass
class FlowPath:
    nodes: List[int]

    @property
    def edges(self) -> List[Arc]:
        return [(min(a, b), max(a, b)) for a, b in zip(self.nodes, self.nodes[1:])]


def _split_matrix(net: FlowNetwork) -> Tuple[csr_matrix, int]:
    """Node v becomes in=2v, out=2v+1 joined by an arc of capacity c(v)"""
    big = net.finite_total() + 1
    rows, cols, caps = [], [], []
    for v in range(net.n):
        rows.append(2 * v)
        cols.append(2 * v + 1)
        caps.append(big if net.capacity[v] is None else net.capacity[v])

    seen = set()
    for u, v in net.edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        rows.extend((2 * u + 1, 2 * v + 1))
        cols.extend((2 * v, 2 * u))
        caps.extend((big, big))

    if big >= np.iinfo(np.int32).max:
        raise FlowError("capacities too large for an int32 network")
    matrix = csr_matrix(
        (np.asarray(caps, dtype=np.int32), (np.asarray(rows), np.asarray(cols))),
        shape=(2 * net.n, 2 * net.n),
    )
    return matrix, big


def max_flow_vertex_capacitated(net: FlowNetwork) -> Tuple[IntegralFlow, VertexCut]:
    """Exact maximum s-t flow plus a minimum vertex cut (L, S, R) with c(S) = value"""
    net.validate()
    matrix, _ = _split_matrix(net)
    result = maximum_flow(matrix, 2 * net.source + 1, 2 * net.sink, method="dinic")
    value = int(result.flow_value)
    flow_matrix = result.flow.tocsr()

    # Residual arcs: forward arcs with spare capacity, reverse arcs with positive flow
    residual = (matrix - flow_matrix).tocsr()
    residual.data[residual.data < 0] = 0
    residual.eliminate_zeros()
    reachable = set(breadth_first_order(residual, 2 * net.source + 1, directed=True, return_predecessors=False).tolist())

    separator = [
        v
        for v in range(net.n)
        if v not in (net.source, net.sink) and 2 * v in reachable and 2 * v + 1 not in reachable
    ]
    cut_capacity = sum(net.capacity[v] for v in separator)
    if cut_capacity != value:
        raise FlowError(f"cut capacity {cut_capacity} differs from flow value {value}")

    blocked = set(separator)
    adjacency: Dict[int, List[int]] = {v: [] for v in range(net.n)}
    for u, v in net.edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    left = {net.source}
    stack = [net.source]
    while stack:
        x = stack.pop()
        for y in adjacency[x]:
            if y not in left and y not in blocked:
                left.add(y)
                stack.append(y)
    terminals = {net.source, net.sink}
    right = [v for v in range(net.n) if v not in left and v not in blocked and v not in terminals]
    cut = VertexCut(VertexSet(left - terminals), VertexSet(separator), VertexSet(right))

    coo = flow_matrix.tocoo()
    arc_flow: Dict[Arc, int] = {}
    throughput = [0] * net.n
    for i, j, f in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
        if f <= 0:
            continue
        if i % 2 == 0 and j == i + 1:
            throughput[i // 2] = f
        elif i % 2 == 1 and j % 2 == 0:
            u, v = i // 2, j // 2
            # opposite arcs of one edge cancel
            back = arc_flow.pop((v, u), 0)
            if back > f:
                arc_flow[(v, u)] = back - f
            elif f > back:
                arc_flow[(u, v)] = f - back

    logger.debug(f"max flow {value} on {net.n} nodes, separator size {len(separator)}")
    return IntegralFlow(value=value, arc_flow=arc_flow, throughput=throughput), cut


def decompose_flow_paths(net: FlowNetwork, f: IntegralFlow) -> List[FlowPath]:
    """Split an integral flow into value(f) source-sink paths; flow cycles are dropped"""
    inflow = [0] * net.n
    outflow = [0] * net.n
    out_arcs: Dict[int, List[int]] = {}
    for (u, v), amount in f.arc_flow.items():
        if amount < 0:
            raise FlowError(f"negative flow on arc ({u}, {v})")
        outflow[u] += amount
        inflow[v] += amount
        out_arcs.setdefault(u, []).append(v)

    for v in range(net.n):
        if v in (net.source, net.sink):
            continue
        if inflow[v] != outflow[v]:
            raise FlowError(f"conservation violated at node {v}: in {inflow[v]}, out {outflow[v]}")
        cap = net.capacity[v]
        if cap is not None and inflow[v] > cap:
            raise FlowError(f"node {v} carries {inflow[v]} > capacity {cap}")
    if outflow[net.source] - inflow[net.source] != f.value:
        raise FlowError("source excess does not match the flow value")

    remaining = dict(f.arc_flow)
    for targets in out_arcs.values():
        targets.sort()
    cursor = {u: 0 for u in out_arcs}

    def next_hop(u: int) -> Optional[int]:
        targets = out_arcs.get(u, [])
        while cursor.get(u, 0) < len(targets):
            w = targets[cursor[u]]
            if remaining[(u, w)] > 0:
                return w
            cursor[u] += 1
        return None

    paths: List[FlowPath] = []
    for _ in range(f.value):
        nodes = [net.source]
        position = {net.source: 0}
        current = net.source
        while current != net.sink:
            w = next_hop(current)
            if w is None:
                raise FlowError(f"flow walk stuck at node {current}")
            remaining[(current, w)] -= 1
            if w in position:
                # closed a cycle; its unit is already cancelled
                for x in nodes[position[w] + 1:]:
                    del position[x]
                del nodes[position[w] + 1:]
            else:
                position[w] = len(nodes)
                nodes.append(w)
            current = w
        paths.append(FlowPath(nodes))

    return paths


def congestion(paths: Sequence[FlowPath]) -> Dict[int, int]:
    """How many paths pass through each internal node"""
    counts: Dict[int, int] = {}
    for path in paths:
        for v in path.nodes[1:-1]:
            counts[v] = counts.get(v, 0) + 1
    return counts
