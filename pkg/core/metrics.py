"""
Per-class delivery statistics and multi-seed aggregation.

Delays are collected in integer picoseconds; summaries convert to
microseconds. PDV follows the minimum-delay reference: peak-to-peak is
``max - min`` and ``pdv_mean`` is the mean of ``delay - min``.
"""
import statistics
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np

from core.exceptions import InvariantViolation
from core.sim_kernel import PS_PER_SECOND, ps_to_us
from schemas.output import BatchSummary, ClassAggregate, ClassSummary, MetricStat, SeedResult

AGGREGATED_METRICS = (
    "latency_mean_us",
    "latency_min_us",
    "latency_max_us",
    "latency_p99_us",
    "pdv_us",
    "pdv_mean_us",
    "plr",
    "offered_load",
)


@dataclass
class ClassMetrics:
    traffic_class: str
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    sum_delay: int = 0
    min_delay: Optional[int] = None
    max_delay: Optional[int] = None
    offered_bytes: int = 0
    last_arrival: int = 0
    delays: List[int] = field(default_factory=list)


def record_arrival(m: ClassMetrics, time: int, length: int) -> None:
    m.generated += 1
    m.offered_bytes += length
    m.last_arrival = time


def record_drop(m: ClassMetrics) -> None:
    m.dropped += 1


def record_delivery(m: ClassMetrics, delay: int) -> None:
    if delay < 0:
        raise InvariantViolation(f"negative {m.traffic_class} delay {delay} ps")
    m.delivered += 1
    m.sum_delay += delay
    m.delays.append(delay)
    if m.min_delay is None or delay < m.min_delay:
        m.min_delay = delay
    if m.max_delay is None or delay > m.max_delay:
        m.max_delay = delay


def mean_delay(m: ClassMetrics) -> Optional[float]:
    if m.delivered == 0:
        return None
    return m.sum_delay / m.delivered


def pdv(m: ClassMetrics) -> Optional[int]:
    """Peak-to-peak delay variation in ps, or ``None`` with no deliveries."""
    if m.delivered == 0:
        return None
    return m.max_delay - m.min_delay


def pdv_mean(m: ClassMetrics) -> Optional[float]:
    if m.delivered == 0:
        return None
    return (m.sum_delay - m.delivered * m.min_delay) / m.delivered


def plr(m: ClassMetrics) -> Optional[float]:
    if m.generated == 0:
        return None
    return m.dropped / m.generated


def offered_load(m: ClassMetrics, capacity_bps: int) -> Optional[float]:
    if m.generated == 0 or m.last_arrival == 0:
        return None
    return m.offered_bytes * 8 * PS_PER_SECOND / (capacity_bps * m.last_arrival)


def _us(value: Optional[float]) -> Optional[float]:
    return None if value is None else ps_to_us(value)


def summarize(m: ClassMetrics, capacity_bps: int) -> ClassSummary:
    p99 = float(np.percentile(m.delays, 99)) if m.delays else None
    return ClassSummary(
        traffic_class=m.traffic_class,
        generated=m.generated,
        delivered=m.delivered,
        dropped=m.dropped,
        latency_mean_us=_us(mean_delay(m)),
        latency_min_us=_us(m.min_delay),
        latency_max_us=_us(m.max_delay),
        latency_p99_us=_us(p99),
        pdv_us=_us(pdv(m)),
        pdv_mean_us=_us(pdv_mean(m)),
        plr=plr(m),
        offered_load=offered_load(m, capacity_bps),
    )


def metric_stat(values: Iterable[Optional[float]]) -> MetricStat:
    """Cross-seed mean and sample standard deviation, skipping seeds without data."""
    present = [v for v in values if v is not None]
    if not present:
        return MetricStat(mean=None, std=None, n=0)
    mean = statistics.fmean(present)
    std = statistics.stdev(present) if len(present) > 1 else 0.0
    return MetricStat(mean=mean, std=std, n=len(present))


def aggregate(batch: List[SeedResult]) -> BatchSummary:
    if not batch:
        raise ValueError("aggregate needs at least one per-seed result")

    classes: Dict[str, ClassAggregate] = {}
    for name in batch[0].classes:
        per_seed = [result.classes[name] for result in batch]
        classes[name] = ClassAggregate(
            traffic_class=name,
            generated=sum(s.generated for s in per_seed),
            delivered=sum(s.delivered for s in per_seed),
            dropped=sum(s.dropped for s in per_seed),
            metrics={key: metric_stat(getattr(s, key) for s in per_seed) for key in AGGREGATED_METRICS},
        )

    return BatchSummary(
        seeds=batch,
        classes=classes,
        utilization=metric_stat(result.utilization for result in batch),
    )
