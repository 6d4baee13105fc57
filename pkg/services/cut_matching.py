import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from config import ROUND_CAP_FACTOR
from services.errors import InvalidPartitionError, InvariantViolation, RoundLimitError
from services.flow import FlowNetwork, VertexCut, decompose_flow_paths, max_flow_vertex_capacitated
from services.graph_core import Graph, VertexSet
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
ParentMap = Dict[int, Optional[int]]


@dataclass
class Matching:
    """Pairs (a, b) with a in A, b in B, and the graph paths routing each pair"""

    pairs: List[Tuple[int, int]]
    paths: List[List[int]]
    embedding_edges: Set[Edge] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class ClusterPartition:
    """Outcome of partition_clusters: ``kind`` is 'giant', 'a' or 'b'"""

    kind: str
    a_side: List[int] = field(default_factory=list)
    b_side: List[int] = field(default_factory=list)
    giant: Optional[List[int]] = None


@dataclass
class GameStats:
    rounds: int = 0
    case_a_rounds: int = 0
    case_b_rounds: int = 0
    potential: List[float] = field(default_factory=list)
    congestion: Dict[int, int] = field(default_factory=dict)

    @property
    def max_congestion(self) -> int:
        return max(self.congestion.values(), default=0)


@dataclass
class CutOrTreeResult:
    """Either ``cut`` is set, or ``dropped`` and ``tree`` (a parent map) are"""

    cut: Optional[VertexCut] = None
    dropped: Optional[VertexSet] = None
    tree: Optional[ParentMap] = None
    stats: GameStats = field(default_factory=GameStats)

    @property
    def is_cut(self) -> bool:
        return self.cut is not None


def ceil_inverse(phi: Fraction) -> int:
    return math.ceil(1 / Fraction(phi))


def tree_edges(parent: ParentMap) -> List[Edge]:
    return sorted((min(v, p), max(v, p)) for v, p in parent.items() if p is not None)


def tree_degrees(parent: ParentMap) -> Dict[int, int]:
    degrees = {v: 0 for v in parent}
    for u, v in tree_edges(parent):
        degrees[u] += 1
        degrees[v] += 1
    return degrees


def cut_is_separating(g: Graph, cut: VertexCut) -> bool:
    """True when no edge of g joins the two sides of the cut"""
    for u in cut.left:
        for w in g.neighbors(u):
            if w in cut.right:
                return False
    return True


def potential(clusters: Iterable[List[int]]) -> float:
    return sum(len(q) * math.log2(len(q)) for q in clusters if len(q) > 1)


def matching_player(
    g: Graph, terminals: VertexSet, phi: Fraction, a_side: VertexSet, b_side: VertexSet
) -> Union[VertexCut, Matching]:
    """Route A to B through g with vertex capacity ceil(1/phi); a small flow yields a sparse cut"""
    a_side, b_side = VertexSet(a_side), VertexSet(b_side)
    if a_side & b_side:
        raise InvalidPartitionError("A and B overlap")
    if (a_side | b_side) != VertexSet(terminals):
        raise InvalidPartitionError("A and B must cover the terminal set exactly")
    phi = Fraction(phi)
    if not 0 < phi <= 1:
        raise InvalidPartitionError(f"phi must lie in (0, 1], got {phi}")

    n = g.n
    a_list, b_list = list(a_side), list(b_side)
    a_nodes = {a: n + i for i, a in enumerate(a_list)}
    b_nodes = {b: n + len(a_list) + j for j, b in enumerate(b_list)}
    source = n + len(a_list) + len(b_list)
    sink = source + 1

    edges = list(g.edges())
    for a, node in a_nodes.items():
        edges.extend(((source, node), (node, a)))
    for b, node in b_nodes.items():
        edges.extend(((b, node), (node, sink)))
    capacity: List[Optional[int]] = [ceil_inverse(phi)] * n + [1] * (len(a_list) + len(b_list)) + [None, None]
    net = FlowNetwork(n=sink + 1, source=source, sink=sink, edges=edges, capacity=capacity)

    flow, cut = max_flow_vertex_capacitated(net)
    smaller = min(len(a_list), len(b_list))

    if 3 * flow.value < smaller:
        left = VertexSet(v for v in cut.left if v < n)
        separator = VertexSet(v for v in cut.separator if v < n)
        right = VertexSet(v for v in cut.right if v < n)
        if len(left & terminals) > len(right & terminals):
            left, right = right, left
        logger.debug(f"matching player: cut with |S|={len(separator)} (flow {flow.value} < {smaller}/3)")
        return VertexCut(left, separator, right)

    pairs: List[Tuple[int, int]] = []
    paths: List[List[int]] = []
    embedding: Set[Edge] = set()
    for path in decompose_flow_paths(net, flow):
        # s, a_aux, a, ..., b, b_aux, t
        inner = path.nodes[2:-2]
        pairs.append((inner[0], inner[-1]))
        paths.append(inner)
        embedding.update((min(x, y), max(x, y)) for x, y in zip(inner, inner[1:]))
    logger.debug(f"matching player: {len(pairs)} pairs embedded over {len(embedding)} edges")
    return Matching(pairs=pairs, paths=paths, embedding_edges=embedding)


def partition_clusters(clusters: List[List[int]], u_size: int, eps: Fraction) -> ClusterPartition:
    """Split witness clusters into (A, B), or report a giant cluster"""
    eps = Fraction(eps)
    for q in clusters:
        if len(q) >= (1 - eps) * u_size:
            return ClusterPartition(kind="giant", giant=sorted(q))

    if all(2 * len(q) <= u_size for q in clusters):
        # heaviest first onto the lighter side
        ordered = sorted(clusters, key=lambda q: (-len(q), min(q)))
        a_side: List[int] = []
        b_side: List[int] = []
        for q in ordered:
            if len(a_side) <= len(b_side):
                a_side.extend(q)
            else:
                b_side.extend(q)
        return ClusterPartition(kind="a", a_side=sorted(a_side), b_side=sorted(b_side))

    big = next(q for q in clusters if 2 * len(q) > u_size)
    rest = sorted(v for q in clusters if q is not big for v in q)
    return ClusterPartition(kind="b", a_side=rest, b_side=sorted(big))


def round_cap(u_size: int) -> int:
    return max(1, math.ceil(ROUND_CAP_FACTOR * math.log2(u_size + 2)))


def cut_or_steiner_tree(g: Graph, terminals: VertexSet, eps: Fraction, phi: Fraction) -> CutOrTreeResult:
    """Play the cut-matching game on the terminals until a sparse cut or a giant witness cluster appears.

    In the tree outcome the tree is a BFS spanning tree of the embedding edges
    around the giant cluster; terminals it misses are returned as dropped.
    """
    terminals = VertexSet(terminals)
    stats = GameStats()
    if len(terminals) <= 1:
        tree = {v: None for v in terminals}
        return CutOrTreeResult(dropped=VertexSet(), tree=tree, stats=stats)

    eps, phi = Fraction(eps), Fraction(phi)
    u_size = len(terminals)
    cap = round_cap(u_size)
    witness = UnionFind(terminals)
    embedding: Set[Edge] = set()
    congestion: Dict[int, int] = {}

    while True:
        decision = partition_clusters(witness.groups(), u_size, eps)
        if decision.kind == "giant":
            break
        stats.rounds += 1
        if stats.rounds > cap:
            raise RoundLimitError(f"cut-matching game exceeded {cap} rounds on {u_size} terminals")
        if decision.kind == "a":
            stats.case_a_rounds += 1
        else:
            stats.case_b_rounds += 1

        result = matching_player(g, terminals, phi, VertexSet(decision.a_side), VertexSet(decision.b_side))
        if isinstance(result, VertexCut):
            stats.congestion = congestion
            logger.debug(f"cut-matching game: cut after {stats.rounds} rounds")
            return CutOrTreeResult(cut=result, stats=stats)

        for a, b in result.pairs:
            witness.union(a, b)
        for path in result.paths:
            for v in path:
                congestion[v] = congestion.get(v, 0) + 1
        embedding |= result.embedding_edges
        stats.potential.append(potential(witness.groups()))

    stats.congestion = congestion
    per_round = ceil_inverse(phi)
    if stats.max_congestion > stats.rounds * per_round:
        raise InvariantViolation(f"embedding congestion {stats.max_congestion} exceeds {stats.rounds}*{per_round}")

    adjacency: Dict[int, List[int]] = {}
    for u, v in sorted(embedding):
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    root = decision.giant[0]
    tree: ParentMap = {root: None}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adjacency.get(x, ()):
            if y not in tree:
                tree[y] = x
                queue.append(y)

    dropped = VertexSet(v for v in terminals if v not in tree)
    missing = [v for v in decision.giant if v not in tree]
    if missing:
        raise InvariantViolation(f"giant cluster vertices {missing} not spanned by the embedding")
    max_degree = max(tree_degrees(tree).values(), default=0)
    if max_degree > 2 * stats.rounds * per_round:
        raise InvariantViolation(f"tree degree {max_degree} exceeds 2*{stats.rounds}*{per_round}")

    logger.debug(
        f"cut-matching game: tree on {len(tree)} vertices after {stats.rounds} rounds, "
        f"{len(dropped)} terminals dropped"
    )
    return CutOrTreeResult(dropped=dropped, tree=tree, stats=stats)
