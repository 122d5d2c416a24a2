"""
Fronthaul latency budget.

    L_total = N * (D_node + PDV_node) + D_T * link_length

All arithmetic runs in integer picoseconds so reference link
lengths such as 9.52 km (two 1.2 us nodes, 50 us budget, 5 us/km)
come out exact.
"""
import logging
from typing import Dict, Iterable, List, Mapping, Optional

from pydantic import BaseModel, Field

from core.sim_kernel import PS_PER_US
from schemas.output import BoundCheck, BudgetRow, ClassAggregate, ProfileVerdict

logger = logging.getLogger(__name__)


class BudgetSpec(BaseModel):
    n_nodes: int = Field(default=2, ge=0)
    node_delay_us: float = Field(default=1.2, ge=0)
    node_pdv_us: float = Field(default=0.0, ge=0)
    propagation_us_per_km: float = Field(default=5.0, gt=0)
    total_budget_us: float = Field(default=50.0, ge=0)


class LinkBudget(BaseModel):
    n_nodes: int
    node_delay_total_us: float
    link_length_km: float
    feasible: bool


def _ps(us: float) -> int:
    return round(us * PS_PER_US)


def max_link_length(spec: BudgetSpec) -> LinkBudget:
    node_total = spec.n_nodes * (_ps(spec.node_delay_us) + _ps(spec.node_pdv_us))
    remainder = _ps(spec.total_budget_us) - node_total
    feasible = remainder >= 0
    return LinkBudget(
        n_nodes=spec.n_nodes,
        node_delay_total_us=node_total / PS_PER_US,
        link_length_km=remainder / _ps(spec.propagation_us_per_km) if feasible else 0.0,
        feasible=feasible,
    )


def budget_total_us(spec: BudgetSpec, link_length_km: float) -> float:
    """End-to-end latency for ``link_length_km`` of fibre."""
    node_total = spec.n_nodes * (_ps(spec.node_delay_us) + _ps(spec.node_pdv_us))
    return (node_total + round(_ps(spec.propagation_us_per_km) * link_length_km)) / PS_PER_US


def budget_table(spec: BudgetSpec, node_counts: Iterable[int]) -> List[BudgetRow]:
    rows = []
    for n in node_counts:
        result = max_link_length(spec.model_copy(update={"n_nodes": n}))
        if not result.feasible:
            logger.warning(f"N={n}: node delay {result.node_delay_total_us} us exceeds the {spec.total_budget_us} us budget")
        rows.append(BudgetRow(**result.model_dump()))
    return rows


class ServiceClassProfile(BaseModel):
    """Upper bounds for one service class; ``None`` means undefined (check skipped)."""

    name: str = ""
    plr_bound: Optional[float] = Field(default=None, ge=0, le=1)
    delay_bound_us: Optional[float] = Field(default=None, ge=0)
    jitter_bound_us: Optional[float] = Field(default=None, ge=0)


class ObservedQoS(BaseModel):
    latency_us: Optional[float] = None
    pdv_us: Optional[float] = None
    plr: Optional[float] = None


def _service_class_profiles() -> Dict[str, ServiceClassProfile]:
    # (name, PLR bound, delay variants in ms, jitter in ms)
    classes = [
        ("video_streaming", 1e-5, (100, 400), 50),
        ("video_conversational", 1e-3, (100, 400), 50),
        ("music_streaming", 1e-5, (100, 400), 50),
        ("voice_conversational", 1e-3, (100, 400), 50),
        ("interactive_messaging", 1e-3, (100, 400), None),
        ("control_traffic", 1e-3, (100,), None),
    ]
    profiles = {}
    for name, plr_bound, delays_ms, jitter_ms in classes:
        for delay_ms in delays_ms:
            key = f"{name}_{delay_ms}ms"
            profiles[key] = ServiceClassProfile(
                name=key,
                plr_bound=plr_bound,
                delay_bound_us=delay_ms * 1000.0,
                jitter_bound_us=None if jitter_ms is None else jitter_ms * 1000.0,
            )
    profiles["general_data_transfer"] = ServiceClassProfile(name="general_data_transfer", plr_bound=1e-3)
    return profiles


BUILTIN_PROFILES: Dict[str, ServiceClassProfile] = {
    "fronthaul": ServiceClassProfile(name="fronthaul", plr_bound=1e-6, delay_bound_us=50.0, jitter_bound_us=5.0),
    "fronthaul_node_budget": ServiceClassProfile(
        name="fronthaul_node_budget", plr_bound=1e-6, delay_bound_us=5.0, jitter_bound_us=5.0
    ),
    "fronthaul_strict_plr": ServiceClassProfile(
        name="fronthaul_strict_plr", plr_bound=1e-9, delay_bound_us=50.0, jitter_bound_us=5.0
    ),
    **_service_class_profiles(),
}


def resolve_profiles(overrides: Optional[Mapping[str, ServiceClassProfile]] = None) -> Dict[str, ServiceClassProfile]:
    profiles = dict(BUILTIN_PROFILES)
    for name, profile in (overrides or {}).items():
        profiles[name] = profile.model_copy(update={"name": name})
    return profiles


def _check(bound: Optional[float], observed: Optional[float]) -> BoundCheck:
    if bound is None:
        return BoundCheck(bound=None, observed=observed, passed=None)
    if observed is None:
        return BoundCheck(bound=bound, observed=None, passed=False)
    return BoundCheck(bound=bound, observed=observed, passed=observed <= bound)


def check_profile(observed: ObservedQoS, profile: ServiceClassProfile, traffic_class: str = "") -> ProfileVerdict:
    checks = {
        "delay": _check(profile.delay_bound_us, observed.latency_us),
        "jitter": _check(profile.jitter_bound_us, observed.pdv_us),
        "plr": _check(profile.plr_bound, observed.plr),
    }
    passed = all(check.passed for check in checks.values() if check.passed is not None)
    return ProfileVerdict(profile=profile.name, traffic_class=traffic_class, checks=checks, passed=passed)


def observed_qos(aggregate: ClassAggregate) -> ObservedQoS:
    """Worst observed latency, peak-to-peak PDV and PLR, each as the cross-seed mean."""
    return ObservedQoS(
        latency_us=aggregate.mean("latency_max_us"),
        pdv_us=aggregate.mean("pdv_us"),
        plr=aggregate.mean("plr"),
    )
