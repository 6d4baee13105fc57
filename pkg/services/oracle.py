import hashlib
import logging
import time
from typing import Iterable, Optional

from config import MEMORY_CAP
from models.schemas import PreprocessMetrics, PreprocessOptions, QueryResult
from services.errors import NoUpdateError
from services.graph_core import Graph, induced_subgraph
from services.hierarchy import Hierarchy, build_hierarchy
from services.oracle_preprocess import (
    AdjacencyLists,
    GlobalOrder,
    RangeCountTable,
    build_global_order,
    build_table,
    compute_adjacency_lists,
    sparsify_ni,
)
from services.oracle_query import query as answer_query
from services.oracle_query import query_result
from services.oracle_update import UpdateState, apply_update

logger = logging.getLogger(__name__)


class Oracle:
    """Connectivity oracle for one graph snapshot and one update bound d_star"""

    def __init__(
        self,
        graph: Graph,
        d_star: int,
        hierarchy: Hierarchy,
        lists: AdjacencyLists,
        order: GlobalOrder,
        table: RangeCountTable,
        metrics: PreprocessMetrics,
        source_graph: Optional[Graph] = None,
    ):
        self.graph = graph
        self.source_graph = source_graph or graph
        self.d_star = d_star
        self.hierarchy = hierarchy
        self.lists = lists
        self.order = order
        self.table = table
        self.metrics = metrics
        self.state: Optional[UpdateState] = None

    @property
    def sparsified(self) -> bool:
        return self.graph is not self.source_graph

    def update(self, d: Iterable[int]) -> UpdateState:
        """Apply D to the preprocessed on/off split, replacing any previous update"""
        self.state = apply_update(self, d)
        return self.state

    def query(self, u: int, v: int) -> bool:
        if self.state is None:
            raise NoUpdateError("no update has been applied")
        return answer_query(self, self.state, u, v)

    def explain(self, u: int, v: int) -> QueryResult:
        if self.state is None:
            raise NoUpdateError("no update has been applied")
        return query_result(self, self.state, u, v)

    def fingerprint(self) -> str:
        """SHA-256 over the preprocessing products"""
        digest = hashlib.sha256()
        digest.update(repr((self.d_star, self.graph.adjacency, self.graph.on_state)).encode())
        for c in self.hierarchy.components:
            digest.update(repr((c.comp_id, c.level, c.parent, c.vertices.sorted(), c.terminals.sorted(), c.tree_id)).encode())
        for t in self.hierarchy.trees:
            digest.update(repr((t.tree_id, t.level, sorted(t.parent.items()), t.terminals.sorted())).encode())
        digest.update(self.order.pos.tobytes())
        for a, b in zip(self.lists.a_pos, self.lists.b_pos):
            digest.update(a.tobytes())
            digest.update(b"|")
            digest.update(b.tobytes())
        if self.lists.off_bitmap is not None:
            digest.update(self.lists.off_bitmap.tobytes())
        for ys, cw in zip(self.table._ys, self.table._cw):
            digest.update(ys.tobytes())
            digest.update(cw.tobytes())
        return digest.hexdigest()


def _elapsed_ms(started: float) -> float:
    return (time.perf_counter() - started) * 1000


def preprocess(g: Graph, d_star: int, opts: Optional[PreprocessOptions] = None) -> Oracle:
    """Build every product needed to answer updates of at most d_star vertices"""
    if d_star < 0:
        raise ValueError("d_star must be non-negative")
    opts = opts or PreprocessOptions()
    if opts.decremental and g.n_off:
        logger.warning(f"decremental mode switches {g.n_off} initially off vertices on")
    source = g.all_on() if opts.decremental else g
    started = time.perf_counter()

    work = sparsify_ni(source, d_star) if opts.sparsify else source

    step = time.perf_counter()
    g_on = induced_subgraph(work, work.on_vertices())
    hierarchy = build_hierarchy(g_on)
    hierarchy_ms = _elapsed_ms(step)

    step = time.perf_counter()
    order = build_global_order(hierarchy, work.off_vertices(), work.n)
    order_ms = _elapsed_ms(step)

    step = time.perf_counter()
    lists = compute_adjacency_lists(work, hierarchy, d_star, order)
    lists_ms = _elapsed_ms(step)

    step = time.perf_counter()
    table = build_table(work, lists, order, opts.memory_cap or MEMORY_CAP)
    table_ms = _elapsed_ms(step)

    metrics = PreprocessMetrics(
        n=source.n,
        m=source.edge_count,
        n_off=source.n_off,
        d_star=d_star,
        m_sparsified=work.edge_count if opts.sparsify else None,
        levels=hierarchy.levels,
        components=len(hierarchy.components),
        trees=len(hierarchy.trees),
        max_degree=hierarchy.max_degree,
        delta_ceiling_exceeded=hierarchy.delta_ceiling_exceeded(source.n),
        sum_a=lists.total_a,
        sum_ab=lists.total_ab,
        table_points=table.point_count,
        hierarchy_ms=hierarchy_ms,
        lists_ms=lists_ms,
        order_ms=order_ms,
        table_ms=table_ms,
        preprocessing_ms=_elapsed_ms(started),
    )
    logger.info(
        f"preprocessed n={metrics.n} m={metrics.m} n_off={metrics.n_off} d_star={d_star} "
        f"in {metrics.preprocessing_ms:.1f} ms"
    )
    return Oracle(work, d_star, hierarchy, lists, order, table, metrics, source_graph=source)


def preprocess_decremental(g: Graph, d_star: int, opts: Optional[PreprocessOptions] = None) -> Oracle:
    """Vertex-failure oracle: every vertex starts on and updates only switch vertices off"""
    opts = (opts or PreprocessOptions()).model_copy(update={"decremental": True})
    return preprocess(g, d_star, opts)
