import logging
import math
import random
import time
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import DEFAULT_QUERIES_PER_TRIAL, DEFAULT_SEED, SHADOW_EDGE_CAP
from models.schemas import BenchRow, InvariantReport, PreprocessOptions, VerifyReport
from services.errors import InvariantViolation
from services.graph_core import Graph, VertexSet, brute_connected, connected_components, induced_subgraph
from services.hierarchy import validate_hierarchy
from services.oracle import Oracle, preprocess
from services.oracle_query import lift_to_group
from services.oracle_update import UpdateState

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


def _pair(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


def artificial_edges(oracle: Oracle, comp_id: int) -> List[Pair]:
    """Clique on B plus biclique between B and A - B, as vertex pairs"""
    lists = oracle.lists
    kernel = lists.b_list(comp_id)
    kernel_set = set(kernel)
    rest = [w for w in lists.a_list(comp_id) if w not in kernel_set]
    edges = [_pair(kernel[i], kernel[j]) for i in range(len(kernel)) for j in range(i + 1, len(kernel))]
    edges.extend(_pair(b, w) for b in kernel for w in rest)
    return edges


def materialize_artificial_graph(oracle: Oracle, cap: int = SHADOW_EDGE_CAP) -> Optional[Counter]:
    """E(G) plus every component's artificial edges as a multiset; None when over the cap"""
    size = oracle.graph.edge_count + sum(
        math.comb(len(b), 2) + len(b) * (len(a) - len(b))
        for a, b in zip(oracle.lists.a_pos, oracle.lists.b_pos)
    )
    if size > cap:
        logger.warning(f"artificial graph has {size} edges, over the shadow cap {cap}")
        return None
    edges = Counter(oracle.graph.edges())
    for cid in range(len(oracle.hierarchy.components)):
        edges.update(artificial_edges(oracle, cid))
    return edges


def materialize_affected_graph(oracle: Oracle, state: UpdateState, full: Counter) -> Counter:
    """The artificial graph induced on Q*, minus the artificial edges of affected components"""
    q = state.q_star
    edges = Counter({e: c for e, c in full.items() if e[0] in q and e[1] in q})
    for cid in state.affected:
        for e in artificial_edges(oracle, cid):
            if e[0] in q and e[1] in q:
                edges[e] -= 1
    return +edges


def interval_vertices(oracle: Oracle, state: UpdateState, index: int) -> List[int]:
    lo, hi = state.intervals[index]
    return oracle.order.pi[lo:hi + 1]


def shadow_check(oracle: Oracle, state: UpdateState, rng: random.Random, samples: int = 100) -> List[str]:
    """Cross-check the update against an explicitly built affected graph"""
    failures: List[str] = []
    full = materialize_artificial_graph(oracle)
    if full is None:
        return failures
    star = materialize_affected_graph(oracle, state, full)
    n = oracle.graph.n
    star_graph = Graph.from_edges(n, star.keys())
    component_of: Dict[int, int] = {}
    for k, part in enumerate(connected_components(star_graph, state.q_star)):
        for v in part:
            component_of[v] = k

    # final groups versus components of the affected graph
    group_component: Dict[int, int] = {}
    for index in range(len(state.intervals)):
        comps = {component_of[v] for v in interval_vertices(oracle, state, index)}
        if len(comps) != 1:
            failures.append(f"interval {state.intervals[index]} spans {len(comps)} affected-graph components")
            continue
        comp = comps.pop()
        gid = state.group_of_interval[index]
        if group_component.setdefault(gid, comp) != comp:
            failures.append(f"group {gid} mixes affected-graph components")
    if len(set(group_component.values())) != len(group_component):
        failures.append("two groups share an affected-graph component")

    # counting identity on interval pairs
    lists = oracle.lists
    count = len(state.intervals)
    pairs = [(x, y) for x in range(count) for y in range(x + 1, count)]
    if len(pairs) > samples:
        pairs = rng.sample(pairs, samples)
    owner = {}
    for index in range(count):
        for v in interval_vertices(oracle, state, index):
            owner[v] = index
    direct: Counter = Counter()
    for (u, v), c in star.items():
        if owner[u] != owner[v]:
            direct[_pair(owner[u], owner[v])] += c
    for x, y in pairs:
        vx = set(interval_vertices(oracle, state, x))
        vy = set(interval_vertices(oracle, state, y))
        formula = sum(c for (a, b), c in full.items() if (a in vx and b in vy) or (a in vy and b in vx))
        for cid in state.affected:
            a_set = set(lists.a_list(cid))
            rest = a_set - set(lists.b_list(cid))
            formula -= len(a_set & vx) * len(a_set & vy) - len(rest & vx) * len(rest & vy)
        if formula != direct[(x, y)]:
            failures.append(f"count between intervals {x} and {y}: formula {formula}, direct {direct[(x, y)]}")

    # affected-graph connectivity agrees with the updated graph
    q = state.q_star.sorted()
    v_new = active_vertices(oracle.source_graph, state.d)
    for _ in range(min(samples, len(q) * len(q))):
        u, v = rng.choice(q), rng.choice(q)
        expect = brute_connected(oracle.source_graph, v_new, u, v)
        if (component_of[u] == component_of[v]) != expect:
            failures.append(f"affected graph disagrees with the updated graph on ({u}, {v})")
        if (lift_to_group(oracle, state, u) == lift_to_group(oracle, state, v)) != expect:
            failures.append(f"groups disagree with the updated graph on ({u}, {v})")
    return failures


def active_vertices(g: Graph, d: Sequence[int]) -> VertexSet:
    """V_new: the on-vertices with every member of D switched"""
    flipped = set(d)
    return VertexSet(v for v in range(g.n) if g.is_on(v) != (v in flipped))


def random_update(g: Graph, size: int, rng: random.Random) -> List[int]:
    return sorted(rng.sample(range(g.n), min(size, g.n)))


def random_queries(v_new: VertexSet, count: int, rng: random.Random) -> List[Pair]:
    members = v_new.sorted()
    if not members:
        return []
    return [(rng.choice(members), rng.choice(members)) for _ in range(count)]


def run_verify(
    graph: Graph,
    d_star: int,
    trials: int,
    queries: int = DEFAULT_QUERIES_PER_TRIAL,
    seed: int = DEFAULT_SEED,
    opts: Optional[PreprocessOptions] = None,
    inject_fault: bool = False,
    shadow: bool = False,
    label: str = "",
) -> VerifyReport:
    """Random updates and queries against the BFS reference, plus structural checks"""
    rng = random.Random(seed)
    oracle = preprocess(graph, d_star, opts)
    reference = oracle.source_graph
    invariants = InvariantReport()
    g_on = oracle.graph.on_vertices()

    invariants.hierarchy_violations = validate_hierarchy(induced_subgraph(oracle.graph, g_on), oracle.hierarchy)
    before = oracle.fingerprint()

    mismatches = 0
    examples: List[str] = []
    asked = 0
    for trial in range(trials):
        d = random_update(reference, rng.randint(0, d_star), rng)
        try:
            state = oracle.update(d)
        except InvariantViolation as e:
            invariants.phase_guard_failures += 1
            logger.error(f"trial {trial}: {e}")
            continue
        v_new = active_vertices(reference, d)
        for u, v in random_queries(v_new, queries, rng):
            answer = oracle.query(u, v)
            if inject_fault and u != v:
                answer = not answer
            asked += 1
            if answer != brute_connected(reference, v_new, u, v):
                mismatches += 1
                if len(examples) < 20:
                    examples.append(f"trial {trial} D={d} query ({u}, {v}) answered {answer}")
        if shadow:
            invariants.shadow_checks += 1
            invariants.shadow_failures.extend(shadow_check(oracle, state, rng))

    invariants.fingerprint_stable = oracle.fingerprint() == before
    report = VerifyReport(
        graph=label,
        d_star=d_star,
        seed=seed,
        trials=trials,
        queries=asked,
        mismatches=mismatches,
        mismatch_examples=examples,
        fault_injected=inject_fault,
        metrics=oracle.metrics,
        invariants=invariants,
    )
    logger.info(f"verify: {trials} trials, {asked} queries, {mismatches} mismatches")
    return report


def report_passed(report: VerifyReport) -> bool:
    inv = report.invariants
    return (
        report.mismatches == 0
        and not inv.hierarchy_violations
        and not inv.shadow_failures
        and inv.phase_guard_failures == 0
        and inv.fingerprint_stable
    )


def run_bench(
    graph: Graph,
    d_values: Sequence[int],
    reps: int,
    queries: int = DEFAULT_QUERIES_PER_TRIAL,
    seed: int = DEFAULT_SEED,
    opts: Optional[PreprocessOptions] = None,
) -> Tuple[pd.DataFrame, Optional[float]]:
    """Mean update and query cost per update size d, and the log-log slope of update time in d"""
    rng = random.Random(seed)
    oracle = preprocess(graph, max(d_values), opts)
    rows: List[BenchRow] = []
    for d in d_values:
        update_us, query_us, intervals, phases = [], [], [], []
        for _ in range(reps):
            batch = random_update(oracle.source_graph, d, rng)
            state = oracle.update(batch)
            update_us.append(state.summary.update_us)
            intervals.append(state.summary.intervals)
            phases.append(state.summary.phases)
            pairs = random_queries(active_vertices(oracle.source_graph, batch), queries, rng)
            started = time.perf_counter()
            for u, v in pairs:
                oracle.query(u, v)
            if pairs:
                query_us.append((time.perf_counter() - started) * 1e6 / len(pairs))
        rows.append(
            BenchRow(
                d=d,
                mean_update_us=float(np.mean(update_us)) if update_us else 0.0,
                mean_query_us=float(np.mean(query_us)) if query_us else 0.0,
                intervals=float(np.mean(intervals)) if intervals else 0.0,
                phases=float(np.mean(phases)) if phases else 0.0,
                preprocessing_ms=oracle.metrics.preprocessing_ms,
            )
        )
        logger.info(f"bench d={d}: {rows[-1].mean_update_us:.1f} us/update")

    frame = pd.DataFrame([row.model_dump() for row in rows])
    usable = frame[(frame["d"] > 0) & (frame["mean_update_us"] > 0)]
    slope = None
    if len(usable) >= 2:
        slope = float(np.polyfit(np.log(usable["d"]), np.log(usable["mean_update_us"]), 1)[0])
    return frame, slope
