import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from services.errors import InvalidVertexError
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


class EulerTourIndex:
    """Preorder of a tree rooted at its smallest vertex, children in ascending id order.

    ``first[v]`` is the position of v itself and ``last[v]`` the position of
    its last descendant, so the subtree of v is exactly [first[v], last[v]].
    """

    def __init__(self, parent_map: Mapping[int, Optional[int]]):
        adjacency: Dict[int, List[int]] = {v: [] for v in parent_map}
        for v, p in parent_map.items():
            if p is not None:
                adjacency[v].append(p)
                adjacency[p].append(v)

        self.order: List[int] = []
        self.position: Dict[int, int] = {}
        self.parent: Dict[int, Optional[int]] = {}
        self.depth: Dict[int, int] = {}
        self.children: Dict[int, List[int]] = {}
        self.last: Dict[int, int] = {}
        self.max_degree = max((len(nbrs) for nbrs in adjacency.values()), default=0)
        self._prefix_cache: Dict[FrozenSet[int], np.ndarray] = {}

        if not adjacency:
            return
        root = min(adjacency)
        self.parent[root] = None
        self.depth[root] = 0
        stack = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                kids = self.children[v]
                self.last[v] = self.last[kids[-1]] if kids else self.position[v]
                continue
            self.position[v] = len(self.order)
            self.order.append(v)
            kids = sorted(w for w in adjacency[v] if w != self.parent[v])
            self.children[v] = kids
            stack.append((v, True))
            for w in reversed(kids):
                self.parent[w] = v
                self.depth[w] = self.depth[v] + 1
                stack.append((w, False))

    @property
    def root(self) -> Optional[int]:
        return self.order[0] if self.order else None

    def __len__(self) -> int:
        return len(self.order)

    def __contains__(self, v: object) -> bool:
        return v in self.position

    def first(self, v: int) -> int:
        return self.position[v]

    def terminal_prefix(self, terminals: FrozenSet[int]) -> np.ndarray:
        """prefix[k] = number of terminals among the first k tour positions"""
        prefix = self._prefix_cache.get(terminals)
        if prefix is None:
            marks = np.fromiter((v in terminals for v in self.order), dtype=np.int64, count=len(self.order))
            prefix = np.concatenate(([0], np.cumsum(marks)))
            self._prefix_cache[terminals] = prefix
        return prefix

    def terminal_order(self, terminals: Iterable[int]) -> List[int]:
        members = set(terminals)
        return [v for v in self.order if v in members]


@dataclass
class IntervalSet:
    """Disjoint inclusive position intervals sorted by lower end, with subtree labels.

    ``origin[i]`` is the index of the full-tour interval that interval i was
    restricted from (identity for unrestricted sets).
    """

    intervals: List[Interval] = field(default_factory=list)
    labels: List[int] = field(default_factory=list)
    origin: List[int] = field(default_factory=list)

    def __post_init__(self):
        self.lows = [lo for lo, _ in self.intervals]
        if not self.origin:
            self.origin = list(range(len(self.intervals)))

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def num_labels(self) -> int:
        return len(set(self.labels))

    def find(self, position: int) -> Optional[int]:
        i = bisect_right(self.lows, position) - 1
        if i >= 0 and self.intervals[i][0] <= position <= self.intervals[i][1]:
            return i
        return None


def preprocess_tree(tree) -> EulerTourIndex:
    """Index a tree given as a parent map or as an object carrying ``parent``"""
    parent_map = tree.parent if hasattr(tree, "parent") else tree
    return EulerTourIndex(parent_map)


def intervals_after_failures(idx: EulerTourIndex, failed: Iterable[int]) -> IntervalSet:
    """Cut the tour at the failed vertices; intervals of one surviving subtree share a label"""
    failed_positions = set()
    for f in failed:
        if f not in idx.position:
            raise InvalidVertexError(f"vertex {f} is not in the tree")
        failed_positions.add(idx.position[f])

    size = len(idx.order)
    if size == 0:
        return IntervalSet()

    starts = {0}
    for pos in failed_positions:
        f = idx.order[pos]
        for c in idx.children[f]:
            starts.add(idx.position[c])
        if idx.last[f] + 1 < size:
            starts.add(idx.last[f] + 1)

    points = sorted(starts | failed_positions)
    intervals: List[Interval] = []
    for i, lo in enumerate(points):
        if lo in failed_positions:
            continue
        hi = points[i + 1] - 1 if i + 1 < len(points) else size - 1
        if lo <= hi:
            intervals.append((lo, hi))

    lows = [lo for lo, _ in intervals]
    forest = UnionFind(range(len(intervals)))
    for i, (lo, _) in enumerate(intervals):
        head = idx.order[lo]
        up = idx.parent[head]
        if up is None or idx.position[up] in failed_positions:
            continue
        j = bisect_right(lows, idx.position[up]) - 1
        forest.union(i, j)

    # labels numbered by first appearance along the tour
    labels: List[int] = []
    seen: Dict[int, int] = {}
    for i in range(len(intervals)):
        root = forest.find(i)
        if root not in seen:
            seen[root] = len(seen)
        labels.append(seen[root])

    return IntervalSet(intervals=intervals, labels=labels)


def locate_interval(idx: EulerTourIndex, iset: IntervalSet, v: int) -> int:
    """Id of the interval holding v's tour position"""
    if v not in idx.position:
        raise InvalidVertexError(f"vertex {v} is not in the tree")
    found = iset.find(idx.position[v])
    if found is None:
        raise InvalidVertexError(f"vertex {v} failed")
    return found


def restrict_to_terminals(idx: EulerTourIndex, iset: IntervalSet, terminals: FrozenSet[int]) -> IntervalSet:
    """Re-express intervals as ranges over the tour order restricted to terminals"""
    prefix = idx.terminal_prefix(frozenset(terminals))
    intervals: List[Interval] = []
    labels: List[int] = []
    origin: List[int] = []
    for i, (lo, hi) in enumerate(iset.intervals):
        new_lo, new_hi = int(prefix[lo]), int(prefix[hi + 1]) - 1
        if new_lo <= new_hi:
            intervals.append((new_lo, new_hi))
            labels.append(iset.labels[i])
            origin.append(i)
    return IntervalSet(intervals=intervals, labels=labels, origin=origin)
