import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from config import BITMAP_CAP, MEMORY_CAP
from services.errors import MemoryBudgetError
from services.graph_core import Graph, VertexSet
from services.hierarchy import Hierarchy

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


@dataclass
class GlobalOrder:
    """pi: terminal-restricted tour blocks of every tree, then the off-vertices"""

    pi: List[int]
    pos: np.ndarray
    block_start: Dict[int, int] = field(default_factory=dict)
    block_size: Dict[int, int] = field(default_factory=dict)
    off_start: int = 0

    def __len__(self) -> int:
        return len(self.pi)

    def block(self, tree_id: int) -> Interval:
        start = self.block_start[tree_id]
        return start, start + self.block_size[tree_id] - 1


@dataclass
class AdjacencyLists:
    """Per component: A (outside neighbours) and B, as pi-sorted vertex lists and position arrays"""

    d_star: int
    a_on: List[List[int]]
    a_off: List[List[int]]
    b_on: List[List[int]]
    a_pos: List[np.ndarray]
    b_pos: List[np.ndarray]
    off_row: Dict[int, int]
    off_bitmap: Optional[np.ndarray] = None
    off_pairs: Optional[Set[Tuple[int, int]]] = None

    def a_list(self, comp_id: int) -> List[int]:
        return self.a_on[comp_id] + self.a_off[comp_id]

    def b_list(self, comp_id: int) -> List[int]:
        return self.b_on[comp_id] + self.a_off[comp_id]

    def off_adjacent(self, v: int, comp_id: int) -> bool:
        """Is the off-vertex v in A_off of the component?"""
        row = self.off_row.get(v)
        if row is None:
            return False
        if self.off_bitmap is not None:
            return bool(self.off_bitmap[row, comp_id])
        return (v, comp_id) in self.off_pairs

    @property
    def total_a(self) -> int:
        return sum(len(p) for p in self.a_pos)

    @property
    def total_ab(self) -> int:
        return sum(len(a) * len(b) for a, b in zip(self.a_pos, self.b_pos))


class RangeCountTable:
    """Static weighted 2D point set answering rectangle sums.

    A merge-sort tree over x: level l groups points by ``x >> l`` and keeps
    each group's y values sorted with cumulative weights. A rectangle is
    split into O(log n) x-blocks, each answered by binary search on y.
    """

    def __init__(self, xs: np.ndarray, ys: np.ndarray, ws: np.ndarray, extent: int):
        self.extent = max(int(extent), 1)
        self.height = (self.extent - 1).bit_length()
        self.point_count = int(len(xs))
        self.total_weight = int(ws.sum()) if len(ws) else 0
        self._ys: List[np.ndarray] = []
        self._cw: List[np.ndarray] = []
        self._starts: List[np.ndarray] = []
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        ws = np.asarray(ws, dtype=np.int64)
        for level in range(self.height + 1):
            blocks = xs >> level
            order = np.lexsort((ys, blocks))
            n_blocks = ((self.extent - 1) >> level) + 1
            self._ys.append(ys[order])
            self._cw.append(np.concatenate(([0], np.cumsum(ws[order]))))
            self._starts.append(np.searchsorted(blocks[order], np.arange(n_blocks + 1), side="left"))

    def _block_sum(self, level: int, block: int, y_lo: int, y_hi: int) -> int:
        s, e = self._starts[level][block], self._starts[level][block + 1]
        if s == e:
            return 0
        ys = self._ys[level]
        a = s + np.searchsorted(ys[s:e], y_lo, side="left")
        b = s + np.searchsorted(ys[s:e], y_hi, side="right")
        cw = self._cw[level]
        return int(cw[b] - cw[a])

    def rectangle(self, x_lo: int, x_hi: int, y_lo: int, y_hi: int) -> int:
        """Total weight of points with x in [x_lo, x_hi] and y in [y_lo, y_hi]"""
        if x_lo > x_hi or y_lo > y_hi or self.point_count == 0:
            return 0
        total = 0
        lo, hi, level = x_lo, x_hi + 1, 0
        while lo < hi:
            if lo & 1:
                total += self._block_sum(level, lo, y_lo, y_hi)
                lo += 1
            if hi & 1:
                hi -= 1
                total += self._block_sum(level, hi, y_lo, y_hi)
            lo >>= 1
            hi >>= 1
            level += 1
        return total


def build_global_order(h: Hierarchy, v_off: VertexSet, n: Optional[int] = None) -> GlobalOrder:
    """Concatenate each tree's tour restricted to its terminals, trees by (level, min terminal); off tail"""
    if n is None:
        n = max([max(t.terminals) for t in h.trees if t.terminals] + [max(v_off) if v_off else -1]) + 1
    pi: List[int] = []
    block_start: Dict[int, int] = {}
    block_size: Dict[int, int] = {}
    for t in sorted(h.trees, key=lambda t: (t.level, t.terminals.min())):
        block_start[t.tree_id] = len(pi)
        block = t.euler.terminal_order(t.terminals.members)
        block_size[t.tree_id] = len(block)
        pi.extend(block)
    off_start = len(pi)
    pi.extend(v_off)

    pos = np.full(n, -1, dtype=np.int64)
    pos[np.asarray(pi, dtype=np.int64)] = np.arange(len(pi), dtype=np.int64)
    return GlobalOrder(pi=pi, pos=pos, block_start=block_start, block_size=block_size, off_start=off_start)


def compute_adjacency_lists(
    g: Graph, h: Hierarchy, d_star: int, order: Optional[GlobalOrder] = None
) -> AdjacencyLists:
    """A_gamma, its on/off split and the kernel B_gamma for every component, sorted by pi"""
    if order is None:
        order = build_global_order(h, g.off_vertices(), g.n)
    pos = order.pos

    a_on: List[List[int]] = []
    a_off: List[List[int]] = []
    b_on: List[List[int]] = []
    a_pos: List[np.ndarray] = []
    b_pos: List[np.ndarray] = []
    for comp in h.components:
        outside = set()
        for v in comp.vertices:
            for w in g.neighbors(v):
                if w not in comp.vertices:
                    outside.add(w)
        ranked = sorted(outside, key=lambda w: pos[w])
        on_part = [w for w in ranked if g.is_on(w)]
        off_part = [w for w in ranked if not g.is_on(w)]
        kernel = on_part[: d_star + 1]
        a_on.append(on_part)
        a_off.append(off_part)
        b_on.append(kernel)
        a_pos.append(np.sort(pos[np.asarray(ranked, dtype=np.int64)]) if ranked else np.empty(0, dtype=np.int64))
        kernel_all = kernel + off_part
        b_pos.append(np.sort(pos[np.asarray(kernel_all, dtype=np.int64)]) if kernel_all else np.empty(0, dtype=np.int64))

    off_vertices = list(g.off_vertices())
    off_row = {v: i for i, v in enumerate(off_vertices)}
    lists = AdjacencyLists(
        d_star=d_star, a_on=a_on, a_off=a_off, b_on=b_on, a_pos=a_pos, b_pos=b_pos, off_row=off_row
    )
    cells = len(off_vertices) * len(h.components)
    if cells <= BITMAP_CAP:
        bitmap = np.zeros((len(off_vertices), len(h.components)), dtype=bool)
        for cid, offs in enumerate(a_off):
            for v in offs:
                bitmap[off_row[v], cid] = True
        lists.off_bitmap = bitmap
    else:
        logger.warning(f"off-indicator bitmap of {cells} cells over cap, using a hash set")
        lists.off_pairs = {(v, cid) for cid, offs in enumerate(a_off) for v in offs}

    logger.info(f"adjacency lists: sum|A| = {lists.total_a}, sum|A||B| = {lists.total_ab}")
    return lists


def artificial_pairs(a_pos: np.ndarray, b_pos: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Endpoints (as pi positions) of a clique on B plus a biclique between B and A - B"""
    rest = np.setdiff1d(a_pos, b_pos, assume_unique=True)
    i, j = np.triu_indices(len(b_pos), k=1)
    left = np.concatenate((b_pos[i], np.repeat(b_pos, len(rest))))
    right = np.concatenate((b_pos[j], np.tile(rest, len(b_pos))))
    return left, right


def build_table(
    g: Graph, lists: AdjacencyLists, order: GlobalOrder, memory_cap: int = MEMORY_CAP
) -> RangeCountTable:
    """Range-count structure over the multiset E(G) plus every component's artificial edges"""
    if lists.total_ab > memory_cap:
        raise MemoryBudgetError(f"sum |A||B| = {lists.total_ab} exceeds the cap {memory_cap}")

    extent = max(len(order), 1)
    pos = order.pos
    lefts: List[np.ndarray] = []
    rights: List[np.ndarray] = []
    edges = np.asarray(list(g.edges()), dtype=np.int64).reshape(-1, 2)
    lefts.append(pos[edges[:, 0]])
    rights.append(pos[edges[:, 1]])
    for a, b in zip(lists.a_pos, lists.b_pos):
        if len(a) < 2:
            continue
        left, right = artificial_pairs(a, b)
        lefts.append(left)
        rights.append(right)

    left = np.concatenate(lefts)
    right = np.concatenate(rights)
    keys = np.concatenate((left * extent + right, right * extent + left))
    unique, counts = np.unique(keys, return_counts=True)
    table = RangeCountTable(unique // extent, unique % extent, counts, extent)
    logger.info(f"range table: {table.point_count} points, {len(left)} edges of the artificial graph")
    return table


def range_count(t: RangeCountTable, first: Interval, second: Interval) -> int:
    """Number of artificial-graph edges with one endpoint in each of two disjoint pi intervals"""
    (a_lo, a_hi), (b_lo, b_hi) = first, second
    if a_lo > a_hi or b_lo > b_hi:
        return 0
    if a_lo <= b_hi and b_lo <= a_hi:
        raise ValueError(f"intervals {first} and {second} overlap")
    return t.rectangle(a_lo, a_hi, b_lo, b_hi)


def sparsify_ni(g: Graph, d_star: int) -> Graph:
    """Keep the first d_star + 1 forests of a maximum-adjacency scan on on-on edges; off edges stay"""
    k = d_star + 1
    rank = [0] * g.n
    visited = [False] * g.n
    kept: List[Tuple[int, int]] = [(u, v) for u, v in g.edges() if not (g.is_on(u) and g.is_on(v))]

    for start in range(g.n):
        if visited[start] or not g.is_on(start):
            continue
        heap = [(0, start)]
        while heap:
            neg_rank, x = heapq.heappop(heap)
            if visited[x] or -neg_rank != rank[x]:
                continue
            visited[x] = True
            for y in g.neighbors(x):
                if visited[y] or not g.is_on(y):
                    continue
                rank[y] += 1
                # edge xy lands in forest number rank[y]
                if rank[y] <= k:
                    kept.append((min(x, y), max(x, y)))
                heapq.heappush(heap, (-rank[y], y))

    sparse = Graph.from_edges(g.n, kept, g.on_state, names=g.names)
    logger.info(f"sparsified {g.edge_count} edges to {sparse.edge_count} (forests: {k})")
    return sparse
