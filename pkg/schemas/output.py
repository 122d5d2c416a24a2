# schemas/output.py
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ClassSummary(BaseModel):
    traffic_class: str
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    latency_mean_us: Optional[float] = None
    latency_min_us: Optional[float] = None
    latency_max_us: Optional[float] = None
    latency_p99_us: Optional[float] = None
    pdv_us: Optional[float] = None
    pdv_mean_us: Optional[float] = None
    plr: Optional[float] = None
    offered_load: Optional[float] = None


class SeedResult(BaseModel):
    seed: int
    classes: Dict[str, ClassSummary]
    utilization: float = Field(default=0.0, ge=0, le=1)
    elapsed_us: float = 0.0
    buffer_peak_bytes: int = 0
    events_dispatched: int = 0


class MetricStat(BaseModel):
    mean: Optional[float] = None
    std: Optional[float] = None
    n: int = 0


class ClassAggregate(BaseModel):
    traffic_class: str
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    metrics: Dict[str, MetricStat] = Field(default_factory=dict)

    def mean(self, key: str) -> Optional[float]:
        return self.metrics[key].mean


class BatchSummary(BaseModel):
    seeds: List[SeedResult]
    classes: Dict[str, ClassAggregate]
    utilization: MetricStat


class SweepPoint(BaseModel):
    parameter: str
    value: float
    gst_load: float
    sm_load: float
    summary: BatchSummary


class BudgetRow(BaseModel):
    n_nodes: int
    node_delay_total_us: float
    link_length_km: float
    feasible: bool


class BoundCheck(BaseModel):
    bound: Optional[float] = None
    observed: Optional[float] = None
    passed: Optional[bool] = None  # None: bound undefined, check skipped


class ProfileVerdict(BaseModel):
    profile: str
    traffic_class: str
    checks: Dict[str, BoundCheck]
    passed: bool
