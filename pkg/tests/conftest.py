import json
import logging

import pytest

from core.event_log import EventLog
from core.fusion_node import FusionNode, NodeParams, SchedulerMode, StrictPriorityNode
from core.metrics import ClassMetrics
from core.redis_client import _IN_MEMORY_STORE
from core.sim_kernel import SimEvent, Simulator
from core.traffic import ARRIVAL_KINDS, Packet, TrafficClass


def _wire(sim, handlers):
    for traffic_class, handler in handlers.items():
        sim.on(ARRIVAL_KINDS[traffic_class], lambda e, h=handler: h(e.time, sim.packets[e.packet_id]))


@pytest.fixture
def fusion_node():
    """Fusion node fed by hand-placed arrivals instead of traffic sources."""

    def build(**params):
        sim = Simulator(event_log=EventLog())
        metrics = {TrafficClass.GST: ClassMetrics("GST"), TrafficClass.SM: ClassMetrics("SM")}
        node = FusionNode(sim, NodeParams(**params), metrics)
        _wire(sim, {TrafficClass.GST: node.on_gst_arrival, TrafficClass.SM: node.on_sm_arrival})
        return sim, node, metrics

    return build


@pytest.fixture
def strict_node():
    def build(**params):
        sim = Simulator()
        metrics = {TrafficClass.HP: ClassMetrics("HP"), TrafficClass.LP: ClassMetrics("LP")}
        node = StrictPriorityNode(
            sim, NodeParams(scheduler_mode=SchedulerMode.STRICT_PRIORITY, **params), metrics
        )
        _wire(sim, {TrafficClass.HP: node.on_hp_arrival, TrafficClass.LP: node.on_lp_arrival})
        return sim, node, metrics

    return build


@pytest.fixture
def inject():
    def place(sim, traffic_class, time, length):
        packet = Packet(id=sim.new_packet_id(), traffic_class=traffic_class, length=length, arrival_time=time)
        sim.packets[packet.id] = packet
        sim.schedule(SimEvent(time, ARRIVAL_KINDS[traffic_class], packet.id))
        return packet

    return place


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture(autouse=True)
def clean_job_store(monkeypatch):
    monkeypatch.delenv("RESULT_WEBHOOK_URL", raising=False)
    _IN_MEMORY_STORE.clear()
    yield
    _IN_MEMORY_STORE.clear()


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
