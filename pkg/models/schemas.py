from typing import List, Optional, Tuple
from enum import Enum
from pydantic import BaseModel, Field
from datetime import datetime
import uuid

class Resolution(str, Enum):
    both_lifted = "both_lifted"
    same_isolated_component = "same_isolated_component"
    cross_isolated = "cross_isolated"

class QueryResult(BaseModel):
    u: int
    v: int
    connected: bool
    path_of_resolution: Resolution

class Trial(BaseModel):
    D: List[int] = Field(default_factory=list)
    queries: List[Tuple[int, int]] = Field(default_factory=list)
    expected: Optional[List[bool]] = None

class Workload(BaseModel):
    workload_id: str = Field(default_factory=lambda: str(uuid.uuid4()))
    d_star: Optional[int] = None
    trials: List[Trial] = Field(default_factory=list)

class PreprocessOptions(BaseModel):
    sparsify: bool = False
    memory_cap: Optional[int] = None
    decremental: bool = False

class PreprocessMetrics(BaseModel):
    n: int
    m: int
    n_off: int
    d_star: int
    m_sparsified: Optional[int] = None
    levels: int = 0
    components: int = 0
    trees: int = 0
    max_degree: int = 0
    delta_ceiling_exceeded: bool = False
    sum_a: int = 0
    sum_ab: int = 0
    table_points: int = 0
    hierarchy_ms: float = 0.0
    lists_ms: float = 0.0
    order_ms: float = 0.0
    table_ms: float = 0.0
    preprocessing_ms: float = 0.0

class UpdateSummary(BaseModel):
    d_on: int = 0
    d_off: int = 0
    affected_components: int = 0
    affected_trees: int = 0
    q_star: int = 0
    intervals: int = 0
    groups: int = 0
    phases: int = 0
    active_per_phase: List[int] = Field(default_factory=list)
    batched_queries: int = 0
    update_us: float = 0.0

class InvariantReport(BaseModel):
    hierarchy_violations: List[str] = Field(default_factory=list)
    shadow_checks: int = 0
    shadow_failures: List[str] = Field(default_factory=list)
    phase_guard_failures: int = 0
    fingerprint_stable: bool = True

class VerifyReport(BaseModel):
    report_id: str = Field(default_factory=lambda: str(uuid.uuid4()))
    created_at: datetime = Field(default_factory=datetime.now)
    graph: str
    d_star: int
    seed: int
    trials: int
    queries: int
    mismatches: int
    mismatch_examples: List[str] = Field(default_factory=list)
    fault_injected: bool = False
    metrics: Optional[PreprocessMetrics] = None
    invariants: InvariantReport = Field(default_factory=InvariantReport)

class BenchRow(BaseModel):
    d: int
    mean_update_us: float
    mean_query_us: float
    intervals: float
    phases: float
    preprocessing_ms: float
