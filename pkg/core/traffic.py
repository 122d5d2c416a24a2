import logging
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Callable, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

from core.sim_kernel import (
    PS_PER_SECOND,
    EventKind,
    RngStream,
    SimEvent,
    Simulator,
    exp_sample,
    uniform_int_sample,
)

logger = logging.getLogger(__name__)


class TrafficClass(str, Enum):
    GST = "GST"
    SM = "SM"
    HP = "HP"
    LP = "LP"


ARRIVAL_KINDS = {
    TrafficClass.GST: EventKind.GST_ARRIVAL,
    TrafficClass.SM: EventKind.SM_ARRIVAL,
    TrafficClass.HP: EventKind.HP_ARRIVAL,
    TrafficClass.LP: EventKind.LP_ARRIVAL,
}


class DeterministicLength(BaseModel):
    model: Literal["deterministic"] = "deterministic"
    length: int = Field(gt=0)

    @property
    def mean(self) -> float:
        return float(self.length)


class UniformIntLength(BaseModel):
    model: Literal["uniform"] = "uniform"
    lo: int = Field(gt=0)
    hi: int = Field(gt=0)

    @model_validator(mode="after")
    def check_range(self):
        if self.lo > self.hi:
            raise ValueError(f"lo ({self.lo}) must not exceed hi ({self.hi})")
        return self

    @property
    def mean(self) -> float:
        return (self.lo + self.hi) / 2


LengthModel = Annotated[Union[DeterministicLength, UniformIntLength], Field(discriminator="model")]


class TrafficSpec(BaseModel):
    traffic_class: TrafficClass
    load: float = Field(ge=0, lt=1)
    length_model: LengthModel
    n_interfaces: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_length_model(self):
        if self.traffic_class is not TrafficClass.SM and not isinstance(self.length_model, DeterministicLength):
            raise ValueError(f"{self.traffic_class.value} packets must have a deterministic length")
        return self

    @property
    def enabled(self) -> bool:
        return self.load > 0


@dataclass(slots=True)
class Packet:
    id: int
    traffic_class: TrafficClass
    length: int
    arrival_time: int
    source_interface: int = 0
    fdl_exit_time: Optional[int] = None
    tx_start_time: Optional[int] = None


def service_time(length: int, capacity_bps: int) -> int:
    """Serialization time in picoseconds, rounded up."""
    return -(-length * 8 * PS_PER_SECOND // capacity_bps)


def _check_load(spec: TrafficSpec) -> None:
    if spec.load >= 1:
        raise ValueError(f"{spec.traffic_class.value} load must be < 1, got {spec.load}")


def _serialized_interarrival(stream: RngStream, spec: TrafficSpec, capacity_bps: int) -> Optional[int]:
    # service time plus an exponential idle gap: a circuit stream on one
    # wavelength never overlaps itself and averages s / load
    _check_load(spec)
    if not spec.enabled:
        return None
    s = service_time(spec.length_model.length, capacity_bps)
    gap_mean = s * (1 / spec.load - 1)
    return s + exp_sample(stream, gap_mean) if gap_mean > 0 else s


def next_gst_interarrival(stream: RngStream, spec: TrafficSpec, capacity_bps: int) -> Optional[int]:
    """Shifted-exponential GST gap in ps; ``None`` when the source is disabled."""
    if spec.traffic_class is not TrafficClass.GST:
        raise ValueError(f"expected a GST spec, got {spec.traffic_class.value}")
    return _serialized_interarrival(stream, spec, capacity_bps)


def _poisson_mean(spec: TrafficSpec, capacity_bps: int) -> float:
    return spec.length_model.mean * 8 * PS_PER_SECOND / (capacity_bps * spec.load)


def _draw_length(stream: RngStream, spec: TrafficSpec) -> int:
    model = spec.length_model
    if isinstance(model, UniformIntLength):
        return uniform_int_sample(stream, model.lo, model.hi)
    return model.length


def next_sm_arrival(stream: RngStream, spec: TrafficSpec, capacity_bps: int) -> Optional[Tuple[int, int]]:
    """(inter-arrival ps, length bytes) for the SM source; ``None`` when disabled."""
    if spec.traffic_class is not TrafficClass.SM:
        raise ValueError(f"expected an SM spec, got {spec.traffic_class.value}")
    _check_load(spec)
    if not spec.enabled:
        return None
    gap = exp_sample(stream, _poisson_mean(spec, capacity_bps))
    return gap, _draw_length(stream, spec)


def next_hp_lp_arrival(stream: RngStream, spec: TrafficSpec, capacity_bps: int) -> Optional[Tuple[int, int]]:
    """HP is serialized like GST; LP is plain Poisson with deterministic length."""
    if spec.traffic_class not in (TrafficClass.HP, TrafficClass.LP):
        raise ValueError(f"expected an HP or LP spec, got {spec.traffic_class.value}")
    if spec.traffic_class is TrafficClass.HP:
        gap = _serialized_interarrival(stream, spec, capacity_bps)
        return None if gap is None else (gap, spec.length_model.length)
    _check_load(spec)
    if not spec.enabled:
        return None
    return exp_sample(stream, _poisson_mean(spec, capacity_bps)), _draw_length(stream, spec)


def next_arrival(stream: RngStream, spec: TrafficSpec, capacity_bps: int) -> Optional[Tuple[int, int]]:
    if spec.traffic_class is TrafficClass.GST:
        gap = next_gst_interarrival(stream, spec, capacity_bps)
        return None if gap is None else (gap, spec.length_model.length)
    if spec.traffic_class is TrafficClass.SM:
        return next_sm_arrival(stream, spec, capacity_bps)
    return next_hp_lp_arrival(stream, spec, capacity_bps)


Sink = Callable[[int, Packet], None]


class TrafficSource:
    """
    Arrival process for one traffic class. Creates at least ``limit``
    packets and keeps going while another enabled source on the same
    simulator is still short of its count. The next arrival is drawn when
    the current one is dispatched.
    """

    def __init__(self, spec: TrafficSpec, capacity_bps: int, stream: RngStream, sink: Sink):
        self.spec = spec
        self.capacity_bps = capacity_bps
        self.stream = stream
        self.sink = sink
        self.kind = ARRIVAL_KINDS[spec.traffic_class]
        self.created = 0
        self.arrived = 0
        self._limit = 0
        self._sim: Optional[Simulator] = None

    @property
    def enabled(self) -> bool:
        return self.spec.enabled

    def attach(self, sim: Simulator) -> "TrafficSource":
        self._sim = sim
        sim.on(self.kind, self._on_arrival)
        sim.add_source(self)
        return self

    def start(self, sim: Simulator, limit: int) -> None:
        self._limit = limit
        if self.enabled and limit > 0:
            self._emit(sim.clock)

    def _emit(self, now: int) -> None:
        gap, length = next_arrival(self.stream, self.spec, self.capacity_bps)
        sim = self._sim
        packet = Packet(
            id=sim.new_packet_id(),
            traffic_class=self.spec.traffic_class,
            length=length,
            arrival_time=now + gap,
            source_interface=self.created % self.spec.n_interfaces,
        )
        self.created += 1
        sim.packets[packet.id] = packet
        sim.schedule(SimEvent(packet.arrival_time, self.kind, packet.id))

    def _keeps_generating(self) -> bool:
        if self.created < self._limit:
            return True
        return any(
            other is not self and other.enabled and other.arrived < self._limit for other in self._sim.sources
        )

    def _on_arrival(self, event: SimEvent) -> None:
        self.arrived += 1
        if self._keeps_generating():
            self._emit(event.time)
        self.sink(event.time, self._sim.packets[event.packet_id])
