import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from models.schemas import UpdateSummary
from services.errors import InvalidVertexError, InvariantViolation, UpdateTooLargeError
from services.euler_intervals import IntervalSet, intervals_after_failures, restrict_to_terminals
from services.graph_core import VertexSet
from services.hierarchy import Hierarchy
from services.oracle_preprocess import range_count
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


@dataclass
class TreeIntervals:
    """Intervals of one affected tree: over its full tour and restricted to its terminals"""

    tree_id: int
    full: IntervalSet
    restricted: IntervalSet
    first_index: int = 0


@dataclass
class CountArrays:
    """Count tables for one Borůvka phase over the active groups in order"""

    count_all: np.ndarray
    count_a: np.ndarray
    count_b: np.ndarray

    def __post_init__(self):
        k = self.count_all.shape[0]
        zeros = np.zeros((self.count_all.shape[0], 1), dtype=np.int64)
        self.row_prefix = np.hstack((zeros, np.cumsum(self.count_all, axis=1)))
        diff = self.count_a - self.count_b
        pad = np.zeros((self.count_a.shape[0], 1), dtype=np.int64)
        self.a_prefix = np.hstack((pad, np.cumsum(self.count_a, axis=1)))
        self.diff_prefix = np.hstack((pad, np.cumsum(diff, axis=1)))
        self.diff = diff
        self.size = k


@dataclass
class UpdateState:
    d: VertexSet
    d_on: VertexSet
    d_off: VertexSet
    affected: List[int] = field(default_factory=list)
    affected_set: frozenset = frozenset()
    affected_trees: List[int] = field(default_factory=list)
    q_star: VertexSet = field(default_factory=VertexSet)
    intervals: List[Interval] = field(default_factory=list)
    tree_intervals: Dict[int, TreeIntervals] = field(default_factory=dict)
    off_interval: Dict[int, int] = field(default_factory=dict)
    group_of_interval: List[int] = field(default_factory=list)
    groups: List[List[int]] = field(default_factory=list)
    summary: UpdateSummary = field(default_factory=UpdateSummary)

    def is_active(self, v: int, on_state) -> bool:
        """v in V_new"""
        if v in self.d:
            return not on_state[v]
        return bool(on_state[v])


def compute_affected(h: Hierarchy, d_on: Iterable[int]) -> Tuple[List[int], List[int], VertexSet]:
    """Components meeting D_on, their trees, and the surviving terminals of those trees"""
    affected = set()
    for v in d_on:
        affected.update(h.chain[v])
    trees = sorted({h.components[c].tree_id for c in affected if h.components[c].tree_id is not None})
    terminals = set()
    for t in trees:
        terminals |= h.trees[t].terminals.members
    return sorted(affected), trees, VertexSet(terminals)


def build_intervals(state: UpdateState, h: Hierarchy, order) -> None:
    """Fill state.intervals (pi positions, sorted) from the affected trees and the newly-on vertices"""
    pending: List[Tuple[Interval, Optional[int], int]] = []
    for tid in state.affected_trees:
        tree = h.trees[tid]
        failed = [v for v in state.d_on if v in tree.parent]
        full = intervals_after_failures(tree.euler, failed)
        restricted = restrict_to_terminals(tree.euler, full, tree.terminals.members)
        state.tree_intervals[tid] = TreeIntervals(tree_id=tid, full=full, restricted=restricted)
        start = order.block_start[tid]
        for i, (lo, hi) in enumerate(restricted.intervals):
            pending.append(((start + lo, start + hi), tid, i))
    for v in state.d_off:
        p = int(order.pos[v])
        pending.append(((p, p), None, v))

    pending.sort(key=lambda item: item[0][0])
    state.intervals = [iv for iv, _, _ in pending]
    for index, (_, tid, key) in enumerate(pending):
        if tid is None:
            state.off_interval[key] = index
        elif key == 0:
            state.tree_intervals[tid].first_index = index


def _initial_counts(intervals: List[Interval], table, lists, affected: List[int]) -> CountArrays:
    k = len(intervals)
    count_all = np.zeros((k, k), dtype=np.int64)
    for x in range(k):
        for y in range(x + 1, k):
            c = range_count(table, intervals[x], intervals[y])
            count_all[x, y] = c
            count_all[y, x] = c

    los = np.asarray([lo for lo, _ in intervals], dtype=np.int64)
    his = np.asarray([hi for _, hi in intervals], dtype=np.int64)
    count_a = np.zeros((len(affected), k), dtype=np.int64)
    count_b = np.zeros((len(affected), k), dtype=np.int64)
    for row, cid in enumerate(affected):
        a_pos, b_pos = lists.a_pos[cid], lists.b_pos[cid]
        count_a[row] = np.searchsorted(a_pos, his, side="right") - np.searchsorted(a_pos, los, side="left")
        count_b[row] = np.searchsorted(b_pos, his, side="right") - np.searchsorted(b_pos, los, side="left")
    return CountArrays(count_all, count_a, count_b)


def build_count_arrays(previous: CountArrays, assignment: np.ndarray) -> CountArrays:
    """Merge a phase's tables into the next: ``assignment`` is old active group x new group"""
    count_all = assignment.T @ previous.count_all @ assignment
    np.fill_diagonal(count_all, 0)
    return CountArrays(count_all, previous.count_a @ assignment, previous.count_b @ assignment)


class BoruvkaSearch:
    """Adjacency queries between active groups of one phase"""

    def __init__(self, counts: CountArrays):
        self.counts = counts
        self.batched_queries = 0

    def batched(self, k: int, l: int, r: int) -> bool:
        """Does group k have an affected-graph edge to any group in l..r?"""
        if l <= k <= r:
            raise ValueError(f"group {k} lies inside the batch [{l}, {r}]")
        self.batched_queries += 1
        c = self.counts
        total = c.row_prefix[k, r + 1] - c.row_prefix[k, l]
        if c.count_a.shape[0]:
            total -= int(np.dot(c.count_a[:, k], c.a_prefix[:, r + 1] - c.a_prefix[:, l]))
            total += int(np.dot(c.diff[:, k], c.diff_prefix[:, r + 1] - c.diff_prefix[:, l]))
        return total > 0

    def adjacent(self, k: int) -> Optional[int]:
        """Some group adjacent to k: the nearest on the right if any, else the nearest on the left"""
        last = self.counts.size - 1
        if k < last and self.batched(k, k + 1, last):
            lo, hi = k + 1, last
            while lo < hi:
                mid = (lo + hi) // 2
                if self.batched(k, k + 1, mid):
                    hi = mid
                else:
                    lo = mid + 1
            return lo
        if k > 0 and self.batched(k, 0, k - 1):
            lo, hi = 0, k - 1
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if self.batched(k, mid, k - 1):
                    lo = mid
                else:
                    hi = mid - 1
            return lo
        return None


def boruvka_merge(state: UpdateState, table, lists) -> None:
    """Group the intervals into the connected components of the affected graph"""
    count = len(state.intervals)
    summary = state.summary
    if count == 0:
        return

    active: List[List[int]] = [[i] for i in range(count)]
    finished: List[List[int]] = []
    counts = _initial_counts(state.intervals, table, lists, state.affected)
    phase_cap = math.ceil(math.log2(count)) + 2 if count > 1 else 2

    while active:
        summary.phases += 1
        summary.active_per_phase.append(len(active))
        if summary.phases > phase_cap:
            raise InvariantViolation(f"Borůvka ran {summary.phases} phases on {count} intervals")

        search = BoruvkaSearch(counts)
        links = UnionFind(range(len(active)))
        isolated = []
        for k in range(len(active)):
            other = search.adjacent(k)
            if other is None:
                isolated.append(k)
            else:
                links.union(k, other)
        summary.batched_queries += search.batched_queries
        logger.debug(f"phase {summary.phases}: {len(active)} active, {len(isolated)} finished")

        for k in isolated:
            finished.append(active[k])
        merged = [g for g in links.groups() if len(g) > 1]
        if 2 * len(merged) > len(active):
            raise InvariantViolation("active groups did not halve")
        if not merged:
            break

        # new groups ordered by their smallest pi position
        merged.sort(key=lambda g: min(state.intervals[active[k][0]][0] for k in g))
        assignment = np.zeros((len(active), len(merged)), dtype=np.int64)
        for new, members in enumerate(merged):
            assignment[members, new] = 1
        counts = build_count_arrays(counts, assignment)
        active = [sorted(i for k in members for i in active[k]) for members in merged]

    finished.sort(key=lambda g: g[0])
    state.groups = finished
    state.group_of_interval = [0] * count
    for gid, members in enumerate(finished):
        for i in members:
            state.group_of_interval[i] = gid


def apply_update(products, d: Iterable[int]) -> UpdateState:
    """Switch the vertices of D against the preprocessed on/off split and group the affected vertices.

    ``products`` carries graph, hierarchy, lists, order, table and d_star
    as built by preprocessing.
    """
    started = time.perf_counter()
    g = products.graph
    d_set = VertexSet(d)
    if len(d_set) > products.d_star:
        raise UpdateTooLargeError(f"|D| = {len(d_set)} exceeds d_star = {products.d_star}")
    for v in d_set:
        if not 0 <= v < g.n:
            raise InvalidVertexError(f"vertex {v} out of range [0, {g.n})")

    d_on = VertexSet(v for v in d_set if g.is_on(v))
    d_off = VertexSet(v for v in d_set if not g.is_on(v))
    state = UpdateState(d=d_set, d_on=d_on, d_off=d_off)

    affected, trees, terminals = compute_affected(products.hierarchy, d_on)
    state.affected = affected
    state.affected_set = frozenset(affected)
    state.affected_trees = trees
    state.q_star = (terminals | d_off) - d_on

    build_intervals(state, products.hierarchy, products.order)
    boruvka_merge(state, products.table, products.lists)

    s = state.summary
    s.d_on, s.d_off = len(d_on), len(d_off)
    s.affected_components = len(affected)
    s.affected_trees = len(trees)
    s.q_star = len(state.q_star)
    s.intervals = len(state.intervals)
    s.groups = len(state.groups)
    s.update_us = (time.perf_counter() - started) * 1e6
    logger.debug(
        f"update: |D|={len(d_set)} affected={len(affected)} intervals={s.intervals} "
        f"groups={s.groups} phases={s.phases}"
    )
    return state
