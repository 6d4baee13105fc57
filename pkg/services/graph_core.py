import logging
from bisect import bisect_left
from collections import deque
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from services.errors import GraphFormatError, InvalidVertexError

logger = logging.getLogger(__name__)

VertexId = int
Edge = Tuple[int, int]


class VertexSet:
    """Immutable set of vertex ids: O(1) membership, iteration in ascending order"""

    __slots__ = ("_members", "_order")

    def __init__(self, members: Iterable[int] = ()):
        self._members = frozenset(members)
        self._order = tuple(sorted(self._members))

    def __contains__(self, v: object) -> bool:
        return v in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._order)

    def __bool__(self) -> bool:
        return bool(self._order)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VertexSet):
            return self._members == other._members
        if isinstance(other, (set, frozenset)):
            return self._members == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return f"VertexSet({list(self._order)})"

    def __or__(self, other: Iterable[int]) -> "VertexSet":
        return VertexSet(self._members.union(other))

    def __and__(self, other: Iterable[int]) -> "VertexSet":
        return VertexSet(self._members.intersection(other))

    def __sub__(self, other: Iterable[int]) -> "VertexSet":
        return VertexSet(self._members.difference(other))

    @property
    def members(self) -> frozenset:
        return self._members

    def sorted(self) -> Tuple[int, ...]:
        return self._order

    def min(self) -> int:
        return self._order[0]


class Graph:
    """Undirected simple graph with per-vertex on/off state.

    Adjacency lists are sorted tuples. ``labels`` maps local ids back to
    the ids of the graph this one was induced from (None means identity).
    """

    def __init__(
        self,
        n: int,
        adjacency: Sequence[Sequence[int]],
        on_state: Optional[Sequence[bool]] = None,
        labels: Optional[Sequence[int]] = None,
        names: Optional[Sequence[str]] = None,
    ):
        if len(adjacency) != n:
            raise ValueError("adjacency must have one list per vertex")
        self.n = n
        self.adjacency: Tuple[Tuple[int, ...], ...] = tuple(tuple(sorted(nbrs)) for nbrs in adjacency)
        self.on_state: Tuple[bool, ...] = tuple(bool(x) for x in on_state) if on_state is not None else (True,) * n
        self.labels: Optional[Tuple[int, ...]] = tuple(labels) if labels is not None else None
        self.names: Optional[Tuple[str, ...]] = tuple(names) if names is not None else None
        self.edge_count = sum(len(nbrs) for nbrs in self.adjacency) // 2

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Edge],
        on_state: Optional[Sequence[bool]] = None,
        names: Optional[Sequence[str]] = None,
    ) -> "Graph":
        """Build a graph, dropping duplicate edges and rejecting self-loops"""
        adjacency: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidVertexError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            if u == v:
                raise InvalidVertexError(f"self-loop at vertex {u}")
            adjacency[u].add(v)
            adjacency[v].add(u)
        return cls(n, adjacency, on_state, names=names)

    # Basic accessors

    @property
    def m(self) -> int:
        return self.edge_count

    def neighbors(self, v: VertexId) -> Tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: VertexId) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        nbrs = self.adjacency[u]
        i = bisect_left(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    def edges(self) -> Iterator[Edge]:
        """Each undirected edge once, as (u, v) with u < v"""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def vertices(self) -> range:
        return range(self.n)

    def is_on(self, v: VertexId) -> bool:
        return self.on_state[v]

    def on_vertices(self) -> VertexSet:
        return VertexSet(v for v in range(self.n) if self.on_state[v])

    def off_vertices(self) -> VertexSet:
        return VertexSet(v for v in range(self.n) if not self.on_state[v])

    @property
    def n_on(self) -> int:
        return sum(self.on_state)

    @property
    def n_off(self) -> int:
        return self.n - self.n_on

    def original_id(self, v: VertexId) -> int:
        return self.labels[v] if self.labels is not None else v

    def with_states(self, on_state: Sequence[bool]) -> "Graph":
        """Same edges, different on/off split"""
        return Graph(self.n, self.adjacency, on_state, self.labels, self.names)

    def all_on(self) -> "Graph":
        return self.with_states([True] * self.n)

    def to_text(self) -> str:
        """Serialise in the edge-list text format read by load_graph"""
        lines = [f"{self.n} {self.edge_count}"]
        if self.names is not None:
            lines.append("labels: " + " ".join(self.names))
        lines.append("on: " + " ".join(str(v) for v in range(self.n) if self.on_state[v]))
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count}, n_on={self.n_on})"


def load_graph(text: Union[str, bytes]) -> Graph:
    """Parse the edge-list format: 'n m', optional 'labels:', 'on: ...', then m edge lines"""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise GraphFormatError("input is not valid UTF-8", text.count(b"\n", 0, e.start) + 1) from e

    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line))

    if not rows:
        raise GraphFormatError("empty input", 1)

    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphFormatError("expected header 'n m'", lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError("header values must be integers", lineno)
    if n < 0 or m < 0:
        raise GraphFormatError("n and m must be non-negative", lineno)

    idx = 1
    names = None
    if idx < len(rows) and rows[idx][1].startswith("labels:"):
        lineno, line = rows[idx]
        names = line[len("labels:"):].split()
        if len(names) != n:
            raise GraphFormatError(f"expected {n} labels, got {len(names)}", lineno)
        idx += 1

    if idx >= len(rows) or not rows[idx][1].startswith("on:"):
        line_at = rows[idx][0] if idx < len(rows) else rows[-1][0] + 1
        raise GraphFormatError("expected 'on:' line", line_at)
    lineno, line = rows[idx]
    on_state = [False] * n
    for tok in line[len("on:"):].split():
        try:
            v = int(tok)
        except ValueError:
            raise GraphFormatError(f"bad vertex id {tok!r}", lineno)
        if not 0 <= v < n:
            raise GraphFormatError(f"vertex {v} out of range [0, {n})", lineno)
        on_state[v] = True
    idx += 1

    edge_rows = rows[idx:]
    if len(edge_rows) != m:
        raise GraphFormatError(f"expected {m} edge lines, found {len(edge_rows)}", edge_rows[-1][0] if edge_rows else lineno)

    edges = []
    for lineno, line in edge_rows:
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError("expected 'u v'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError("edge endpoints must be integers", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge ({u}, {v}) has an endpoint outside [0, {n})", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        edges.append((u, v))

    graph = Graph.from_edges(n, edges, on_state, names=names)
    if graph.edge_count < m:
        logger.debug(f"dropped {m - graph.edge_count} duplicate edges")
    return graph


def induced_subgraph(g: Graph, s: Iterable[int]) -> Graph:
    """Subgraph induced by s, relabelled to [0, |s|); labels map back to g's original ids"""
    members = sorted(set(s))
    local = {v: i for i, v in enumerate(members)}
    adjacency = [[local[w] for w in g.adjacency[v] if w in local] for v in members]
    on_state = [g.on_state[v] for v in members]
    labels = [g.original_id(v) for v in members]
    names = [g.names[v] for v in members] if g.names is not None else None
    return Graph(len(members), adjacency, on_state, labels, names)


def connected_components(g: Graph, active: Optional[Iterable[int]] = None) -> List[List[int]]:
    """Maximal connected vertex sets of g (or of g[active]), ordered by smallest member"""
    if active is None:
        allowed = None
        order: Iterable[int] = range(g.n)
    else:
        allowed = set(active)
        order = sorted(allowed)

    seen = set()
    parts = []
    for root in order:
        if root in seen:
            continue
        seen.add(root)
        part = [root]
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in g.adjacency[x]:
                if y not in seen and (allowed is None or y in allowed):
                    seen.add(y)
                    part.append(y)
                    queue.append(y)
        part.sort()
        parts.append(part)
    return parts


def bfs_parents(g: Graph, root: int, allowed: Optional[Iterable[int]] = None) -> Dict[int, Optional[int]]:
    """BFS tree from root as a parent map (root -> None), neighbors visited in id order"""
    allowed_set = None if allowed is None else set(allowed)
    parent: Dict[int, Optional[int]] = {root: None}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in g.adjacency[x]:
            if y not in parent and (allowed_set is None or y in allowed_set):
                parent[y] = x
                queue.append(y)
    return parent


def bfs_path(g: Graph, source: int, target: int) -> Optional[List[int]]:
    """Shortest source-target path, or None when disconnected"""
    parent = bfs_parents(g, source)
    if target not in parent:
        return None
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def brute_connected(g: Graph, active: Iterable[int], u: VertexId, v: VertexId) -> bool:
    """Reference oracle: are u and v connected in g[active]? Plain BFS"""
    active_set = active.members if isinstance(active, VertexSet) else set(active)
    if u not in active_set:
        raise InvalidVertexError(f"vertex {u} is not active")
    if v not in active_set:
        raise InvalidVertexError(f"vertex {v} is not active")
    if u == v:
        return True

    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in g.adjacency[x]:
            if y in active_set and y not in seen:
                if y == v:
                    return True
                seen.add(y)
                queue.append(y)
    return False
