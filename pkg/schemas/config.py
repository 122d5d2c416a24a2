from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.budget import BudgetSpec, ServiceClassProfile
from core.fusion_node import NodeParams, SchedulerMode
from core.traffic import DeterministicLength, TrafficClass, TrafficSpec, UniformIntLength, service_time

DEFAULT_SEEDS = [907, 234, 326, 104, 711, 523, 883, 113, 417, 656]
MAX_SYSTEM_LOAD = 0.99


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    link_capacity_bps: int = Field(default=10_000_000_000, gt=0)
    gst_length: int = Field(default=1200, gt=0)
    sm_length_min: int = Field(default=40, gt=0)
    sm_length_max: int = Field(default=1500, gt=0)
    lp_length: int = Field(default=1500, gt=0)
    gst_load: float = Field(default=0.0, ge=0, lt=1)
    sm_load: float = Field(default=0.0, ge=0, lt=1)
    n_interfaces: int = Field(default=10, ge=1)
    n_packets: int = Field(default=40_000, ge=0)
    seeds: List[int] = Field(default_factory=lambda: list(DEFAULT_SEEDS), min_length=1)
    buffer_capacity_bytes: int = Field(default=16 * 1024 * 1024, gt=0)
    scheduler_mode: SchedulerMode = SchedulerMode.FUSION
    scan_depth: int = Field(default=1, ge=1)
    fdl_delay_ps: Optional[int] = Field(default=None, ge=0)
    allow_overload: bool = False

    @model_validator(mode="after")
    def check_consistency(self):
        if self.sm_length_min > self.sm_length_max:
            raise ValueError(f"sm_length_min ({self.sm_length_min}) exceeds sm_length_max ({self.sm_length_max})")
        if not self.allow_overload and self.system_load > MAX_SYSTEM_LOAD + 1e-9:
            raise ValueError(
                f"gst_load + sm_load = {self.system_load:.4f} exceeds {MAX_SYSTEM_LOAD}; set allow_overload to run it"
            )
        longest = service_time(self.sm_length_max, self.link_capacity_bps)
        if self.scheduler_mode is SchedulerMode.FUSION and self.effective_fdl_delay_ps < longest:
            raise ValueError(
                f"fdl_delay_ps ({self.effective_fdl_delay_ps}) must cover the longest SM service time ({longest} ps)"
            )
        if self.buffer_capacity_bytes <= max(self.sm_length_max, self.lp_length, self.gst_length):
            raise ValueError("buffer_capacity_bytes must exceed the largest packet length")
        return self

    @property
    def system_load(self) -> float:
        return self.gst_load + self.sm_load

    @property
    def effective_fdl_delay_ps(self) -> int:
        if self.fdl_delay_ps is not None:
            return self.fdl_delay_ps
        return service_time(self.sm_length_max, self.link_capacity_bps)

    def node_params(self) -> NodeParams:
        return NodeParams(
            link_capacity_bps=self.link_capacity_bps,
            fdl_delay_ps=self.effective_fdl_delay_ps,
            buffer_capacity_bytes=self.buffer_capacity_bytes,
            max_sm_length=self.sm_length_max,
            scheduler_mode=self.scheduler_mode,
            scan_depth=self.scan_depth,
        )

    def traffic_specs(self) -> List[TrafficSpec]:
        """[priority class, best-effort class] for the configured scheduler mode."""
        if self.scheduler_mode is SchedulerMode.FUSION:
            return [
                TrafficSpec(
                    traffic_class=TrafficClass.GST,
                    load=self.gst_load,
                    length_model=DeterministicLength(length=self.gst_length),
                ),
                TrafficSpec(
                    traffic_class=TrafficClass.SM,
                    load=self.sm_load,
                    length_model=UniformIntLength(lo=self.sm_length_min, hi=self.sm_length_max),
                    n_interfaces=self.n_interfaces,
                ),
            ]
        return [
            TrafficSpec(
                traffic_class=TrafficClass.HP,
                load=self.gst_load,
                length_model=DeterministicLength(length=self.gst_length),
            ),
            TrafficSpec(
                traffic_class=TrafficClass.LP,
                load=self.sm_load,
                length_model=DeterministicLength(length=self.lp_length),
                n_interfaces=self.n_interfaces,
            ),
        ]

    @property
    def class_names(self) -> List[str]:
        return [spec.traffic_class.value for spec in self.traffic_specs()]


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: Literal["gst_load", "sm_load"] = "gst_load"
    values: Optional[List[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_points(self):
        if self.values is None and None in (self.start, self.stop, self.step):
            raise ValueError("sweep needs either values or start/stop/step")
        if self.values is not None and not self.values:
            raise ValueError("sweep values must not be empty")
        return self

    def points(self) -> List[float]:
        if self.values is not None:
            return list(self.values)
        # inclusive stop; rounding removes arange drift (0.1 + 0.2 ...)
        grid = np.arange(self.start, self.stop + self.step / 2, self.step)
        return [float(v) for v in np.round(grid, 6)]


class BudgetSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    node_delay_us: float = Field(default=1.2, ge=0)
    node_pdv_us: float = Field(default=0.0, ge=0)
    propagation_us_per_km: float = Field(default=5.0, gt=0)
    total_budget_us: float = Field(default=50.0, ge=0)
    n_min: int = Field(default=2, ge=0)
    n_max: int = Field(default=6, ge=0)

    @model_validator(mode="after")
    def check_range(self):
        if self.n_min > self.n_max:
            raise ValueError(f"n_min ({self.n_min}) exceeds n_max ({self.n_max})")
        return self

    def node_counts(self) -> List[int]:
        return list(range(self.n_min, self.n_max + 1))

    def spec(self) -> BudgetSpec:
        return BudgetSpec(**self.model_dump(exclude={"n_min", "n_max"}), n_nodes=self.n_min)


class ProfileCheck(BaseModel):
    traffic_class: TrafficClass
    profile: str


class ExperimentFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run: RunConfig = Field(default_factory=RunConfig)
    sweep: Optional[SweepSpec] = None
    budget: BudgetSection = Field(default_factory=BudgetSection)
    profiles: Dict[str, ServiceClassProfile] = Field(default_factory=dict)
    checks: List[ProfileCheck] = Field(
        default_factory=lambda: [ProfileCheck(traffic_class=TrafficClass.GST, profile="fronthaul")]
    )
