"""
Discrete-event engine for the node simulator.

Virtual time is kept in integer picoseconds so the FDL gap test compares
exact values: a 40-byte frame at 10 Gb/s takes exactly 32_000 ps.
"""
import heapq
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence

import numpy as np

from core.exceptions import SchedulingError, SimulationHalted

if TYPE_CHECKING:
    from core.event_log import EventLog

logger = logging.getLogger(__name__)

PS_PER_SECOND = 10**12
PS_PER_US = 10**6


def seconds_to_ps(seconds: float) -> int:
    return round(seconds * PS_PER_SECOND)


def ps_to_us(ps: float) -> float:
    return ps / PS_PER_US


class EventKind(IntEnum):
    """Event kinds. The value is the tie-break rank for events at the same instant."""

    FDL_EXIT = 0
    TX_COMPLETE = 1
    SM_ARRIVAL = 2
    GST_ARRIVAL = 3
    LP_ARRIVAL = 4
    HP_ARRIVAL = 5


@dataclass(slots=True, frozen=True)
class SimEvent:
    time: int
    kind: EventKind
    packet_id: int


class RngStream:
    """
    Seedable random stream backed by numpy's PCG64.

    Each traffic source owns one stream; stream ``index`` of a seed is
    derived with ``SeedSequence(seed, spawn_key=(index,))`` so the GST and
    SM sources of one sub-simulation never share state.
    """

    def __init__(self, seed: int, index: int = 0):
        self.seed = seed
        self.index = index
        sequence = np.random.SeedSequence(seed, spawn_key=(index,))
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def exponential(self, mean: float) -> float:
        return float(self._generator.exponential(mean))

    def integer(self, lo: int, hi: int) -> int:
        return int(self._generator.integers(lo, hi, endpoint=True))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, index={self.index})"


def exp_sample(stream: RngStream, mean: float) -> int:
    """Exponential sample with the given mean, in picoseconds."""
    if mean <= 0:
        raise ValueError(f"exponential mean must be positive, got {mean}")
    return round(stream.exponential(mean))


def uniform_int_sample(stream: RngStream, lo: int, hi: int) -> int:
    """Equiprobable integer in [lo, hi]."""
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if lo == hi:
        return lo
    return stream.integer(lo, hi)


Handler = Callable[[SimEvent], None]


class Simulator:
    """
    Single-threaded event loop: a binary heap ordered by
    (time, kind rank, insertion sequence), one handler per event kind,
    and the traffic sources that feed it.
    """

    def __init__(self, event_log: Optional["EventLog"] = None):
        self.clock = 0
        self.event_log = event_log
        self.packets: Dict[int, object] = {}
        self.events_dispatched = 0
        self._queue: List[tuple] = []
        self._sequence = 0
        self._handlers: Dict[EventKind, Handler] = {}
        self._sources: list = []
        self._next_packet_id = 0

    def on(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def add_source(self, source) -> None:
        self._sources.append(source)

    @property
    def sources(self) -> Sequence:
        return self._sources

    def new_packet_id(self) -> int:
        packet_id = self._next_packet_id
        self._next_packet_id += 1
        return packet_id

    def release(self, packet_id: int) -> None:
        self.packets.pop(packet_id, None)

    def trace(self, time: int, kind: str, packet) -> None:
        if self.event_log is not None:
            self.event_log.record(time, kind, packet)

    @property
    def pending(self) -> int:
        return len(self._queue)

    def schedule(self, event: SimEvent) -> None:
        if event.time < self.clock:
            raise SchedulingError(
                f"{event.kind.name} for packet {event.packet_id} scheduled at "
                f"{event.time} ps, clock already at {self.clock} ps"
            )
        heapq.heappush(self._queue, (event.time, event.kind, self._sequence, event))
        self._sequence += 1

    def run(self, until_packets: int) -> None:
        """
        Generate at least ``until_packets`` per enabled source, then drain the node.

        Sources share one generation window: a class that reaches its count
        keeps arriving until every other enabled class has reached it too, so
        the configured loads overlap for the whole run. The class that
        finishes last stops at exactly ``until_packets``.
        """
        if until_packets < 0:
            raise ValueError(f"until_packets must be >= 0, got {until_packets}")

        for source in self._sources:
            source.start(self, until_packets)

        queue = self._queue
        handlers = self._handlers
        while queue:
            time, kind, _, event = heapq.heappop(queue)
            self.clock = time
            handler = handlers.get(kind)
            if handler is None:
                raise SimulationHalted(f"no handler registered for {kind.name} at {time} ps")
            if self.event_log is not None:
                self.event_log.record(time, kind.name, self.packets.get(event.packet_id))
            handler(event)
            self.events_dispatched += 1

        short = [s for s in self._sources if s.enabled and s.arrived < until_packets]
        if short:
            detail = ", ".join(f"{s.spec.traffic_class.value}={s.arrived}" for s in short)
            raise SimulationHalted(
                f"event queue empty at {self.clock} ps before reaching "
                f"{until_packets} packets per source ({detail})"
            )

        logger.debug(f"Run drained at {self.clock} ps after {self.events_dispatched} events")
