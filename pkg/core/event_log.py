"""
Raw event log and the independent audit over it.

One record per dispatched event plus the node actions that are not
events themselves (``TX_START``, ``DROP``). The audit rebuilds per-class
metrics from the records alone, without touching simulator state.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Sequence, Set, Union

from core.exceptions import ReportError
from core.metrics import ClassMetrics, record_arrival, record_delivery, record_drop
from core.traffic import service_time

logger = logging.getLogger(__name__)

ARRIVAL_KINDS = {"GST_ARRIVAL", "SM_ARRIVAL", "HP_ARRIVAL", "LP_ARRIVAL"}


class LogRecord(NamedTuple):
    time_ps: int
    kind: str
    packet_id: int
    traffic_class: str
    length: int


class EventLog:
    def __init__(self):
        self.records: List[LogRecord] = []

    def record(self, time: int, kind: str, packet) -> None:
        if packet is None:
            self.records.append(LogRecord(time, kind, -1, "-", 0))
            return
        self.records.append(LogRecord(time, kind, packet.id, packet.traffic_class.value, packet.length))

    def __len__(self) -> int:
        return len(self.records)


def write_event_log(destination: Union[str, Path], runs: Sequence[tuple]) -> None:
    """Write ``(seed, records)`` pairs, one line per record, in the given order."""
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("# seed time_ps kind packet_id class length\n")
            for seed, records in runs:
                for r in records:
                    handle.write(f"{seed} {r.time_ps} {r.kind} {r.packet_id} {r.traffic_class} {r.length}\n")
    except OSError as exc:
        raise ReportError(f"cannot write event log to {destination}: {exc}") from exc
    logger.info(f"Event log written to {destination}")


def read_event_log(source: Union[str, Path]) -> Dict[int, List[LogRecord]]:
    runs: Dict[int, List[LogRecord]] = {}
    with open(source, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip() or line.startswith("#"):
                continue
            seed, time_ps, kind, packet_id, traffic_class, length = line.split()
            runs.setdefault(int(seed), []).append(
                LogRecord(int(time_ps), kind, int(packet_id), traffic_class, int(length))
            )
    return runs


def audit_event_log(records: Iterable[LogRecord], classes: Iterable[str]) -> Dict[str, ClassMetrics]:
    """Recompute per-class metrics from raw records."""
    metrics = {name: ClassMetrics(traffic_class=name) for name in classes}
    arrivals: Dict[int, int] = {}
    for r in records:
        if r.kind in ARRIVAL_KINDS:
            arrivals[r.packet_id] = r.time_ps
            record_arrival(metrics[r.traffic_class], r.time_ps, r.length)
        elif r.kind == "DROP":
            record_drop(metrics[r.traffic_class])
        elif r.kind == "TX_START":
            record_delivery(metrics[r.traffic_class], r.time_ps - arrivals[r.packet_id])
    return metrics


def link_violations(records: Iterable[LogRecord], capacity_bps: int, fdl_delay_ps: int = 0) -> List[str]:
    """
    Property check over one run's log: output transmissions are disjoint,
    SM leaves in arrival order, and every SM frame ends before the next GST
    frame that was already inside the FDL when the SM frame started.
    """
    problems = []
    last_end = 0
    sm_arrival_order: List[int] = []
    sm_dropped: Set[int] = set()
    sm_tx_order: List[int] = []
    gst_exits: List[int] = []
    sm_starts = []
    for r in records:
        if r.kind == "SM_ARRIVAL":
            sm_arrival_order.append(r.packet_id)
        elif r.kind == "GST_ARRIVAL":
            gst_exits.append(r.time_ps + fdl_delay_ps)
        elif r.kind == "DROP" and r.traffic_class == "SM":
            sm_dropped.add(r.packet_id)
        elif r.kind == "TX_START":
            if r.time_ps < last_end:
                problems.append(f"packet {r.packet_id} starts at {r.time_ps} ps before previous end {last_end} ps")
            last_end = r.time_ps + service_time(r.length, capacity_bps)
            if r.traffic_class == "SM":
                sm_tx_order.append(r.packet_id)
                sm_starts.append((r.time_ps, last_end, r.packet_id))

    admitted = [packet_id for packet_id in sm_arrival_order if packet_id not in sm_dropped]
    if sm_tx_order != admitted[: len(sm_tx_order)]:
        problems.append("SM frames left the node out of arrival order")

    gst_exits.sort()
    index = 0
    for start, end, packet_id in sm_starts:
        # next exit among GST frames that had arrived by the SM start
        while index < len(gst_exits) and gst_exits[index] <= start:
            index += 1
        if index < len(gst_exits) and gst_exits[index] - fdl_delay_ps <= start and end > gst_exits[index]:
            problems.append(f"SM packet {packet_id} overruns GST exit at {gst_exits[index]} ps")
    return problems
