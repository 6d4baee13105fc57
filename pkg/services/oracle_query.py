import logging
from typing import Optional, Tuple, Union

from models.schemas import QueryResult, Resolution
from services.errors import InvalidVertexError, InvariantViolation
from services.euler_intervals import locate_interval
from services.oracle_update import UpdateState

logger = logging.getLogger(__name__)


class IsolatedComponent:
    """Token for a maximal unaffected component with no active outside neighbour"""

    __slots__ = ("comp_id",)

    def __init__(self, comp_id: int):
        self.comp_id = comp_id

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IsolatedComponent) and other.comp_id == self.comp_id

    def __hash__(self) -> int:
        return hash(("isolated", self.comp_id))

    def __repr__(self) -> str:
        return f"IsolatedComponent({self.comp_id})"


Representative = Union[int, IsolatedComponent]


def top_unaffected(products, state: UpdateState, u: int) -> int:
    """Highest component on u's chain that the update does not touch"""
    chain = products.hierarchy.chain[u]
    for cid in reversed(chain):
        if cid not in state.affected_set:
            return cid
    raise InvariantViolation(f"vertex {u} is outside Q* but every component on its chain is affected")


def find_representative(products, state: UpdateState, u: int) -> Representative:
    """u itself when in Q*, else some active outside neighbour of u's top unaffected component"""
    if u in state.q_star:
        return u
    cid = top_unaffected(products, state, u)
    lists = products.lists

    for w in state.d_off:
        if lists.off_adjacent(w, cid):
            return w

    probes = 0
    for w in lists.a_on[cid]:
        if probes > len(state.d_on):
            break
        probes += 1
        if w not in state.d_on:
            return w
    return IsolatedComponent(cid)


def lift_to_group(products, state: UpdateState, w: int) -> int:
    """Group id in the final partition for a vertex of Q*"""
    if w in state.d_off:
        return state.group_of_interval[state.off_interval[w]]
    h = products.hierarchy
    tid = h.owner_tree[w]
    tree_sets = state.tree_intervals.get(tid)
    if tree_sets is None:
        raise InvariantViolation(f"vertex {w} is in Q* but its tree {tid} is unaffected")
    tree = h.trees[tid]
    full_index = locate_interval(tree.euler, tree_sets.full, w)
    # the restricted set keeps intervals in tour order; find the one restricted from full_index
    restricted = tree_sets.restricted
    lo, hi = 0, len(restricted.origin) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if restricted.origin[mid] < full_index:
            lo = mid + 1
        else:
            hi = mid
    if not restricted.origin or restricted.origin[lo] != full_index:
        raise InvariantViolation(f"terminal {w} has no restricted interval")
    return state.group_of_interval[tree_sets.first_index + lo]


def resolve(products, state: UpdateState, u: int, v: int) -> Tuple[bool, Resolution]:
    """Connectivity of u and v in the updated graph, with the branch that decided it"""
    on_state = products.graph.on_state
    for x in (u, v):
        if not 0 <= x < products.graph.n or not state.is_active(x, on_state):
            raise InvalidVertexError(f"vertex {x} is not active after the update")
    if u == v:
        return True, Resolution.both_lifted if u in state.q_star else Resolution.same_isolated_component

    ru = find_representative(products, state, u)
    rv = find_representative(products, state, v)
    for iso, other in ((ru, v), (rv, u)):
        if isinstance(iso, IsolatedComponent):
            inside = other in products.hierarchy.components[iso.comp_id].vertices
            return inside, Resolution.same_isolated_component if inside else Resolution.cross_isolated

    return lift_to_group(products, state, ru) == lift_to_group(products, state, rv), Resolution.both_lifted


def query(products, state: UpdateState, u: int, v: int) -> bool:
    return resolve(products, state, u, v)[0]


def query_result(products, state: UpdateState, u: int, v: int) -> QueryResult:
    connected, how = resolve(products, state, u, v)
    return QueryResult(u=u, v=v, connected=connected, path_of_resolution=how)
