import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from config import DELTA_CEILING_FACTOR, HIERARCHY_EPS
from services.cut_matching import ParentMap, cut_or_steiner_tree, tree_degrees, tree_edges
from services.euler_intervals import EulerTourIndex, preprocess_tree
from services.graph_core import Graph, VertexSet, bfs_path, connected_components, induced_subgraph

logger = logging.getLogger(__name__)


@dataclass
class SteinerTree:
    tree_id: int
    level: int
    parent: ParentMap
    terminals: VertexSet
    euler: Optional[EulerTourIndex] = None

    @property
    def vertices(self) -> VertexSet:
        return VertexSet(self.parent)

    @property
    def max_degree(self) -> int:
        return max(tree_degrees(self.parent).values(), default=0)

    def edges(self) -> List[Tuple[int, int]]:
        return tree_edges(self.parent)


@dataclass
class Component:
    comp_id: int
    level: int
    vertices: VertexSet
    parent: Optional[int] = None
    children: List[int] = field(default_factory=list)
    terminals: VertexSet = field(default_factory=VertexSet)
    tree_id: Optional[int] = None


@dataclass
class SFStats:
    depth: int = 0
    dropped_total: int = 0
    cut_total: int = 0
    leaf_steps: int = 0
    rounds: int = 0


@dataclass
class SFResult:
    separator: VertexSet
    trees: List[ParentMap]
    phi: Fraction
    stats: SFStats = field(default_factory=SFStats)


@dataclass
class Hierarchy:
    """Laminar components and low-degree Steiner trees over the on-vertices.

    Level 1 is the bottom; a component with ``parent is None`` is a connected
    component of the on-graph. ``chain[v]`` lists the components holding v
    from its terminal level upwards.
    """

    components: List[Component] = field(default_factory=list)
    trees: List[SteinerTree] = field(default_factory=list)
    chain: Dict[int, List[int]] = field(default_factory=dict)
    terminal_level: Dict[int, int] = field(default_factory=dict)
    owner_tree: Dict[int, int] = field(default_factory=dict)
    levels: int = 0

    @property
    def max_degree(self) -> int:
        return max((t.max_degree for t in self.trees), default=0)

    def delta_ceiling(self, n: int) -> float:
        return DELTA_CEILING_FACTOR * math.log2(n + 2) ** 2

    def delta_ceiling_exceeded(self, n: int) -> bool:
        return self.max_degree > self.delta_ceiling(n)

    def components_at(self, level: int) -> List[Component]:
        return [c for c in self.components if c.level == level]

    def trees_at(self, level: int) -> List[SteinerTree]:
        return [t for t in self.trees if t.level == level]

    def dump(self) -> str:
        """Text listing of every level, component and tree"""
        lines = [f"levels {self.levels} components {len(self.components)} trees {len(self.trees)} delta {self.max_degree}"]
        for level in range(self.levels, 0, -1):
            lines.append(f"level {level}")
            for c in self.components_at(level):
                parent = "-" if c.parent is None else str(c.parent)
                tree = "-" if c.tree_id is None else str(c.tree_id)
                lines.append(
                    f"  component {c.comp_id} parent {parent} tree {tree} "
                    f"vertices [{' '.join(map(str, c.vertices))}] terminals [{' '.join(map(str, c.terminals))}]"
                )
            for t in self.trees_at(level):
                edges = " ".join(f"{u}-{v}" for u, v in t.edges())
                lines.append(f"  tree {t.tree_id} terminals [{' '.join(map(str, t.terminals))}] edges [{edges}]")
        return "\n".join(lines)


def steiner_phi(eps: Fraction, u_size: int) -> Fraction:
    """eps/2 over log2 of the terminal count (clamped at 4, rounded up to keep phi rational)"""
    return Fraction(eps) / 2 / math.ceil(math.log2(max(u_size, 4)))


def sf_decomp(g: Graph, terminals: VertexSet, eps: Fraction) -> SFResult:
    """Separator X with |X| <= eps|U| plus one low-degree Steiner tree per component of g - X meeting U"""
    eps = Fraction(eps)
    terminals = VertexSet(terminals)
    phi = steiner_phi(eps, len(terminals))
    stats = SFStats()
    separator, trees = _sf_recurse(g, terminals, eps / 2, phi, 1, stats)
    logger.debug(
        f"sf_decomp: |U|={len(terminals)} |X|={len(separator)} trees={len(trees)} depth={stats.depth}"
    )
    return SFResult(separator=VertexSet(separator), trees=trees, phi=phi, stats=stats)


def _sf_recurse(
    g: Graph, terminals: VertexSet, eps_half: Fraction, phi: Fraction, depth: int, stats: SFStats
) -> Tuple[List[int], List[ParentMap]]:
    stats.depth = max(stats.depth, depth)
    if len(terminals) == 0:
        return [], []
    if len(terminals) == 1:
        stats.leaf_steps += 1
        return [], [{terminals.min(): None}]
    if len(terminals) == 2:
        stats.leaf_steps += 1
        a, b = terminals.sorted()
        path = bfs_path(g, a, b)
        if path is None:
            return [], [{a: None}, {b: None}]
        return [], [{v: (path[i - 1] if i else None) for i, v in enumerate(path)}]

    result = cut_or_steiner_tree(g, terminals, eps_half, phi)
    stats.rounds += result.stats.rounds
    if not result.is_cut:
        stats.leaf_steps += 1
        stats.dropped_total += len(result.dropped)
        return list(result.dropped), [result.tree]

    cut = result.cut
    stats.cut_total += len(cut.separator)
    separator = list(cut.separator)
    trees: List[ParentMap] = []
    for side in (cut.left, cut.right):
        members = side.sorted()
        sub = induced_subgraph(g, members)
        local = {v: i for i, v in enumerate(members)}
        sub_terminals = VertexSet(local[v] for v in terminals if v in side)
        sub_sep, sub_trees = _sf_recurse(sub, sub_terminals, eps_half, phi, depth + 1, stats)
        separator.extend(members[v] for v in sub_sep)
        for t in sub_trees:
            trees.append({members[v]: (members[p] if p is not None else None) for v, p in t.items()})
    return separator, trees


def build_hierarchy(g_on: Graph, eps: Fraction = HIERARCHY_EPS) -> Hierarchy:
    """Low-degree hierarchy of every connected component of g_on, in g_on's original ids"""
    h = Hierarchy()
    for comp in connected_components(g_on):
        piece = induced_subgraph(g_on, comp)
        _build_piece(piece, h, eps)

    for t in h.trees:
        t.euler = preprocess_tree(t)
    logger.info(
        f"hierarchy: {len(h.components)} components, {len(h.trees)} trees, "
        f"{h.levels} levels, delta {h.max_degree}"
    )
    if h.delta_ceiling_exceeded(g_on.n):
        logger.warning(f"tree degree {h.max_degree} above ceiling {h.delta_ceiling(g_on.n):.1f}")
    return h


def _build_piece(piece: Graph, h: Hierarchy, eps: Fraction) -> None:
    """Repeated sf_decomp on one connected piece; appends components and trees to h"""
    ids = piece.original_id
    first_comp = len(h.components)
    x_sets: List[VertexSet] = [VertexSet(range(piece.n))]
    level_trees: List[List[ParentMap]] = []
    while x_sets[-1]:
        result = sf_decomp(piece, x_sets[-1], eps)
        level_trees.append(result.trees)
        x_sets.append(result.separator)

    p = len(level_trees)
    h.levels = max(h.levels, p)

    # above[i] = X_i | ... | X_p, with above[p + 1] empty
    above: List[set] = [set() for _ in range(p + 2)]
    for i in range(p, 0, -1):
        above[i] = above[i + 1] | x_sets[i - 1].members

    owner_at_level: Dict[int, Dict[int, int]] = {}
    for i in range(p, 0, -1):
        active = [v for v in range(piece.n) if v not in above[i + 1]]
        level_terminals = above[i] - above[i + 1]
        owner_at_level[i] = {}
        for part in connected_components(piece, active):
            comp = Component(
                comp_id=len(h.components),
                level=i,
                vertices=VertexSet(ids(v) for v in part),
                terminals=VertexSet(ids(v) for v in part if v in level_terminals),
            )
            if i < p:
                comp.parent = owner_at_level[i + 1][part[0]]
                h.components[comp.parent].children.append(comp.comp_id)
            for v in part:
                owner_at_level[i][v] = comp.comp_id
            h.components.append(comp)

        for tree in level_trees[i - 1]:
            tree_terminals = [v for v in tree if v in level_terminals]
            if not tree_terminals:
                continue
            st = SteinerTree(
                tree_id=len(h.trees),
                level=i,
                parent={ids(v): (ids(q) if q is not None else None) for v, q in tree.items()},
                terminals=VertexSet(ids(v) for v in tree_terminals),
            )
            h.trees.append(st)
            for v in tree_terminals:
                h.owner_tree[ids(v)] = st.tree_id
                h.terminal_level[ids(v)] = i

    for i in range(1, p + 1):
        for v in range(piece.n):
            cid = owner_at_level[i].get(v)
            if cid is None:
                continue
            h.chain.setdefault(ids(v), []).append(cid)

    for comp in h.components[first_comp:]:
        if comp.terminals:
            comp.tree_id = h.owner_tree[comp.terminals.min()]


def _tree_is_spanning_tree(g_on: Graph, local: Dict[int, int], tree: SteinerTree) -> List[str]:
    problems = []
    roots = [v for v, q in tree.parent.items() if q is None]
    if len(roots) != 1:
        problems.append(f"tree {tree.tree_id} has {len(roots)} roots")
    for u, v in tree.edges():
        if u not in local or v not in local or not g_on.has_edge(local[u], local[v]):
            problems.append(f"tree {tree.tree_id} edge {u}-{v} not in the graph")
    # reachability from the first root along tree edges
    if roots:
        adjacency: Dict[int, List[int]] = {v: [] for v in tree.parent}
        for u, v in tree.edges():
            adjacency[u].append(v)
            adjacency[v].append(u)
        seen = {roots[0]}
        queue = deque([roots[0]])
        while queue:
            x = queue.popleft()
            for y in adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != len(tree.parent):
            problems.append(f"tree {tree.tree_id} is disconnected")
    if len(tree.edges()) != len(tree.parent) - 1:
        problems.append(f"tree {tree.tree_id} is not acyclic")
    return problems


def validate_hierarchy(g_on: Graph, h: Hierarchy) -> List[str]:
    """Every violated structural property, as readable messages (empty means valid)"""
    violations: List[str] = []
    local = {g_on.original_id(v): v for v in range(g_on.n)}
    v_on = set(local)

    by_level: Dict[int, List[Component]] = {}
    for c in h.components:
        by_level.setdefault(c.level, []).append(c)

    # components: connected, disjoint per level, no crossing edges
    for level, comps in by_level.items():
        owner: Dict[int, int] = {}
        for c in comps:
            members = [local[v] for v in c.vertices if v in local]
            if len(members) != len(c.vertices):
                violations.append(f"component {c.comp_id} holds vertices outside the on-graph")
            if members and len(connected_components(g_on, members)) != 1:
                violations.append(f"component {c.comp_id} is not connected")
            for v in c.vertices:
                if v in owner:
                    violations.append(f"level {level}: vertex {v} in components {owner[v]} and {c.comp_id}")
                owner[v] = c.comp_id
        for c in comps:
            for v in c.vertices:
                if v not in local:
                    continue
                for w in g_on.neighbors(local[v]):
                    other = owner.get(g_on.original_id(w))
                    if other is not None and other != c.comp_id:
                        violations.append(f"level {level}: edge {v}-{g_on.original_id(w)} joins two components")

    # parents and terminal sets
    tops = []
    for c in h.components:
        if c.parent is None:
            tops.append(frozenset(c.vertices.members))
            continue
        parent = h.components[c.parent]
        if parent.level != c.level + 1:
            violations.append(f"component {c.comp_id} parent {parent.comp_id} not one level up")
        if not c.vertices.members <= parent.vertices.members:
            violations.append(f"component {c.comp_id} not contained in its parent {parent.comp_id}")
    for c in h.components:
        below = set()
        for k in c.children:
            below |= h.components[k].vertices.members
        if c.terminals != VertexSet(c.vertices.members - below):
            violations.append(f"component {c.comp_id} terminals differ from vertices minus children")
    expected_tops = {frozenset(g_on.original_id(v) for v in part) for part in connected_components(g_on)}
    if set(tops) != expected_tops:
        violations.append("top components differ from the connected components of the on-graph")

    # trees
    level_terminals: Dict[int, set] = {}
    for c in h.components:
        level_terminals.setdefault(c.level, set()).update(c.terminals)
    for level in {t.level for t in h.trees}:
        used: Dict[int, int] = {}
        for t in h.trees_at(level):
            for v in t.parent:
                if v in used:
                    violations.append(f"level {level}: trees {used[v]} and {t.tree_id} share vertex {v}")
                used[v] = t.tree_id
    for t in h.trees:
        violations.extend(_tree_is_spanning_tree(g_on, local, t))
        expected = VertexSet(v for v in t.parent if v in level_terminals.get(t.level, set()))
        if t.terminals != expected:
            violations.append(f"tree {t.tree_id} terminals differ from level terminals inside it")
    for c in h.components:
        if not c.terminals:
            continue
        if c.tree_id is None:
            violations.append(f"component {c.comp_id} has terminals but no tree")
            continue
        t = h.trees[c.tree_id]
        if t.level != c.level or not c.terminals.members <= t.terminals.members:
            violations.append(f"component {c.comp_id} terminals not covered by tree {t.tree_id}")

    # partitions of the on-vertices
    for name, groups in (
        ("component terminals", [c.terminals for c in h.components]),
        ("level terminals", [VertexSet(s) for s in level_terminals.values()]),
        ("tree terminals", [t.terminals for t in h.trees]),
    ):
        total = sum(len(s) for s in groups)
        union = set()
        for s in groups:
            union |= s.members
        if total != len(union) or union != v_on:
            violations.append(f"{name} do not partition the on-vertices")

    return violations
