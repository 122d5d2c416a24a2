"""
Data plane of the hybrid node.

Fusion mode: GST frames pass a fixed delay line (FDL) of length delta and
leave on the output link exactly delta after arrival. SM frames wait in a
byte-bounded FIFO and are only started when they finish before the next
GST frame leaves the FDL. With delta equal to the largest SM service
time, an empty FDL means any SM frame fits.

Strict-priority mode models a plain non-preemptive Ethernet switch with
an HP and an LP queue, for comparison.
"""
import logging
from collections import deque
from enum import Enum
from typing import Deque, Dict, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from core.exceptions import InvariantViolation
from core.metrics import ClassMetrics, record_arrival, record_delivery, record_drop
from core.sim_kernel import EventKind, SimEvent, Simulator
from core.traffic import Packet, TrafficClass, service_time

logger = logging.getLogger(__name__)


class SchedulerMode(str, Enum):
    FUSION = "fusion"
    STRICT_PRIORITY = "strict_priority"


class NodeParams(BaseModel):
    link_capacity_bps: int = Field(default=10_000_000_000, gt=0)
    fdl_delay_ps: int = Field(default=1_200_000, ge=0)
    buffer_capacity_bytes: int = Field(default=16 * 1024 * 1024, gt=0)
    max_sm_length: int = Field(default=1500, gt=0)
    scheduler_mode: SchedulerMode = SchedulerMode.FUSION
    scan_depth: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_lookahead(self):
        longest = service_time(self.max_sm_length, self.link_capacity_bps)
        if self.scheduler_mode is SchedulerMode.FUSION and self.fdl_delay_ps < longest:
            raise ValueError(
                f"fdl_delay_ps ({self.fdl_delay_ps}) must cover the longest SM service time ({longest} ps)"
            )
        if self.buffer_capacity_bytes <= self.max_sm_length:
            raise ValueError("buffer_capacity_bytes must exceed the max SM length")
        return self


class FdlState:
    """GST frames inside the delay line, in exit order."""

    def __init__(self, delay: int):
        self.delay = delay
        self.in_flight: Deque[Tuple[int, int]] = deque()

    def admit(self, packet_id: int, arrival_time: int) -> int:
        exit_time = arrival_time + self.delay
        self.in_flight.append((packet_id, exit_time))
        return exit_time

    def release(self, packet_id: int, time: int) -> None:
        head_id, exit_time = self.in_flight.popleft()
        if head_id != packet_id or exit_time != time:
            raise InvariantViolation(
                f"FDL released packet {packet_id} at {time} ps, expected {head_id} at {exit_time} ps"
            )

    def gap(self, time: int) -> Optional[int]:
        """Idle time before the next GST exit; ``None`` when the FDL is empty."""
        if not self.in_flight:
            return None
        return self.in_flight[0][1] - time

    def __len__(self) -> int:
        return len(self.in_flight)


class PacketBuffer:
    """Byte-bounded FIFO with drop-tail admission."""

    def __init__(self, capacity_bytes: int):
        self.capacity_bytes = capacity_bytes
        self.queue: Deque[Packet] = deque()
        self.occupancy = 0
        self.peak_occupancy = 0

    def offer(self, packet: Packet) -> bool:
        if self.occupancy + packet.length > self.capacity_bytes:
            return False
        self.queue.append(packet)
        self.occupancy += packet.length
        if self.occupancy > self.peak_occupancy:
            self.peak_occupancy = self.occupancy
        return True

    def take(self, index: int = 0) -> Packet:
        if index == 0:
            packet = self.queue.popleft()
        else:
            packet = self.queue[index]
            del self.queue[index]
        self.occupancy -= packet.length
        return packet

    def __len__(self) -> int:
        return len(self.queue)

    def __bool__(self) -> bool:
        return bool(self.queue)


class OutputLink:
    """The shared output wavelength. Transmissions never overlap."""

    def __init__(self, sim: Simulator, capacity_bps: int):
        self.sim = sim
        self.capacity_bps = capacity_bps
        self.busy_until = 0
        self.current_packet: Optional[int] = None
        self.busy_time = 0

    def is_idle(self, time: int) -> bool:
        return self.busy_until <= time

    def service_time(self, packet: Packet) -> int:
        return service_time(packet.length, self.capacity_bps)

    def transmit(self, time: int, packet: Packet) -> int:
        if self.busy_until > time:
            raise InvariantViolation(
                f"{packet.traffic_class.value} packet {packet.id} started at {time} ps "
                f"while packet {self.current_packet} holds the link until {self.busy_until} ps"
            )
        duration = self.service_time(packet)
        packet.tx_start_time = time
        self.busy_until = time + duration
        self.current_packet = packet.id
        self.busy_time += duration
        self.sim.trace(time, "TX_START", packet)
        self.sim.schedule(SimEvent(self.busy_until, EventKind.TX_COMPLETE, packet.id))
        return self.busy_until

    def complete(self, packet_id: int) -> None:
        if self.current_packet == packet_id:
            self.current_packet = None
        self.sim.release(packet_id)


class _Node:
    def __init__(self, sim: Simulator, params: NodeParams, metrics: Dict[TrafficClass, ClassMetrics]):
        self.sim = sim
        self.params = params
        self.metrics = metrics
        self.link = OutputLink(sim, params.link_capacity_bps)
        sim.on(EventKind.TX_COMPLETE, self._on_tx_complete)

    def _drop(self, time: int, packet: Packet) -> None:
        record_drop(self.metrics[packet.traffic_class])
        self.sim.trace(time, "DROP", packet)
        self.sim.release(packet.id)

    def _start(self, time: int, packet: Packet) -> None:
        self.link.transmit(time, packet)
        record_delivery(self.metrics[packet.traffic_class], time - packet.arrival_time)

    def _on_tx_complete(self, event: SimEvent) -> None:
        self.link.complete(event.packet_id)
        if self.link.is_idle(event.time):
            self.on_link_idle(event.time)

    def on_link_idle(self, time: int) -> None:
        raise NotImplementedError

    @property
    def buffer_peak_bytes(self) -> int:
        raise NotImplementedError


class FusionNode(_Node):
    def __init__(self, sim: Simulator, params: NodeParams, metrics: Dict[TrafficClass, ClassMetrics]):
        super().__init__(sim, params, metrics)
        self.fdl = FdlState(params.fdl_delay_ps)
        self.buffer = PacketBuffer(params.buffer_capacity_bytes)
        sim.on(EventKind.FDL_EXIT, self._on_fdl_exit_event)

    @property
    def buffer_peak_bytes(self) -> int:
        return self.buffer.peak_occupancy

    def on_gst_arrival(self, time: int, packet: Packet) -> None:
        record_arrival(self.metrics[TrafficClass.GST], time, packet.length)
        exit_time = self.fdl.admit(packet.id, time)
        self.sim.schedule(SimEvent(exit_time, EventKind.FDL_EXIT, packet.id))

    def _on_fdl_exit_event(self, event: SimEvent) -> None:
        self.on_fdl_exit(event.time, self.sim.packets[event.packet_id])

    def on_fdl_exit(self, time: int, packet: Packet) -> None:
        self.fdl.release(packet.id, time)
        packet.fdl_exit_time = time
        # GST owns the link at its exit instant; a busy link here means the gap test failed
        self._start(time, packet)

    def on_sm_arrival(self, time: int, packet: Packet) -> None:
        record_arrival(self.metrics[TrafficClass.SM], time, packet.length)
        if not self.buffer.offer(packet):
            self._drop(time, packet)
            return
        if self.link.is_idle(time):
            self.try_insert_sm(time)

    def on_link_idle(self, time: int) -> None:
        self.try_insert_sm(time)

    def try_insert_sm(self, time: int) -> bool:
        if not self.buffer or not self.link.is_idle(time):
            return False
        gap = self.fdl.gap(time)
        queue = self.buffer.queue
        for index in range(min(self.params.scan_depth, len(queue))):
            candidate = queue[index]
            if gap is None or self.link.service_time(candidate) <= gap:
                self._start(time, self.buffer.take(index))
                return True
        return False


class StrictPriorityNode(_Node):
    def __init__(self, sim: Simulator, params: NodeParams, metrics: Dict[TrafficClass, ClassMetrics]):
        super().__init__(sim, params, metrics)
        self.queues = {
            TrafficClass.HP: PacketBuffer(params.buffer_capacity_bytes),
            TrafficClass.LP: PacketBuffer(params.buffer_capacity_bytes),
        }

    @property
    def buffer_peak_bytes(self) -> int:
        return max(queue.peak_occupancy for queue in self.queues.values())

    def _on_arrival(self, time: int, packet: Packet) -> None:
        record_arrival(self.metrics[packet.traffic_class], time, packet.length)
        if not self.queues[packet.traffic_class].offer(packet):
            self._drop(time, packet)
            return
        self.strict_priority_step(time)

    on_hp_arrival = _on_arrival
    on_lp_arrival = _on_arrival

    def on_link_idle(self, time: int) -> None:
        self.strict_priority_step(time)

    def strict_priority_step(self, time: int) -> None:
        if not self.link.is_idle(time):
            return
        for traffic_class in (TrafficClass.HP, TrafficClass.LP):
            queue = self.queues[traffic_class]
            if queue:
                self._start(time, queue.take())
                return
