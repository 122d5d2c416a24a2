import numpy as np
import pytest

from core.exceptions import SchedulingError, SimulationHalted
from core.sim_kernel import (
    EventKind,
    RngStream,
    SimEvent,
    Simulator,
    exp_sample,
    seconds_to_ps,
    uniform_int_sample,
)


def _recording_sim():
    sim = Simulator()
    seen = []
    for kind in EventKind:
        sim.on(kind, lambda e: seen.append((e.time, e.kind, e.packet_id)))
    return sim, seen


def test_dispatch_order_is_time_then_kind_then_insertion():
    sim, seen = _recording_sim()
    sim.schedule(SimEvent(5, EventKind.GST_ARRIVAL, 1))
    sim.schedule(SimEvent(5, EventKind.FDL_EXIT, 2))
    sim.schedule(SimEvent(3, EventKind.SM_ARRIVAL, 3))
    sim.schedule(SimEvent(5, EventKind.FDL_EXIT, 4))
    sim.schedule(SimEvent(5, EventKind.TX_COMPLETE, 5))

    sim.run(0)

    assert seen == [
        (3, EventKind.SM_ARRIVAL, 3),
        (5, EventKind.FDL_EXIT, 2),
        (5, EventKind.FDL_EXIT, 4),
        (5, EventKind.TX_COMPLETE, 5),
        (5, EventKind.GST_ARRIVAL, 1),
    ]
    assert sim.clock == 5
    assert sim.events_dispatched == 5


def test_event_at_current_clock_runs_after_queued_same_time_events():
    sim = Simulator()
    seen = []

    def first(event):
        seen.append(event.packet_id)
        sim.schedule(SimEvent(event.time, EventKind.SM_ARRIVAL, 99))

    sim.on(EventKind.FDL_EXIT, first)
    sim.on(EventKind.SM_ARRIVAL, lambda e: seen.append(e.packet_id))
    sim.schedule(SimEvent(10, EventKind.FDL_EXIT, 1))
    sim.schedule(SimEvent(10, EventKind.SM_ARRIVAL, 2))

    sim.run(0)

    assert seen == [1, 2, 99]


def test_scheduling_into_the_past_is_rejected():
    sim = Simulator()
    sim.on(EventKind.GST_ARRIVAL, lambda e: sim.schedule(SimEvent(2, EventKind.SM_ARRIVAL, 0)))
    sim.schedule(SimEvent(3, EventKind.GST_ARRIVAL, 0))

    with pytest.raises(SchedulingError):
        sim.run(0)


def test_missing_handler_halts_the_run():
    sim = Simulator()
    sim.schedule(SimEvent(1, EventKind.TX_COMPLETE, 0))

    with pytest.raises(SimulationHalted):
        sim.run(0)


def test_empty_run_terminates_immediately():
    sim = Simulator()
    sim.run(0)
    assert sim.clock == 0
    assert sim.pending == 0


def test_exp_sample_mean_converges():
    stream = RngStream(907)
    mean = seconds_to_ps(1.92e-6)
    draws = [exp_sample(stream, mean) for _ in range(1_000_000)]
    assert np.mean(draws) == pytest.approx(mean, rel=0.01)
    assert min(draws) >= 0


def test_exp_sample_rejects_non_positive_mean():
    with pytest.raises(ValueError):
        exp_sample(RngStream(1), 0)


def test_streams_are_reproducible_and_independent():
    def first_five(stream):
        return [exp_sample(stream, 1_000_000) for _ in range(5)]

    assert first_five(RngStream(42, 0)) == first_five(RngStream(42, 0))
    assert first_five(RngStream(42, 1)) != first_five(RngStream(42, 0))
    assert first_five(RngStream(43, 0)) != first_five(RngStream(42, 0))


def test_uniform_int_sample_range_and_mean():
    stream = RngStream(234)
    draws = [uniform_int_sample(stream, 40, 1500) for _ in range(200_000)]
    assert min(draws) == 40
    assert max(draws) == 1500
    assert np.mean(draws) == pytest.approx(770, rel=0.01)


def test_sm_lengths_pass_a_chi_square_uniformity_check():
    stream = RngStream(326, 1)
    draws = np.array([uniform_int_sample(stream, 40, 1500) for _ in range(100_000)])
    values = np.arange(40, 1501)

    # 20 bins over the 1461 integer lengths, each bin weighted by how many lengths it holds
    expected = np.bincount((values - 40) * 20 // len(values), minlength=20) / len(values) * len(draws)
    observed = np.bincount((draws - 40) * 20 // len(values), minlength=20)
    statistic = float(((observed - expected) ** 2 / expected).sum())

    assert len(observed) == 20
    # 1% critical value for 19 degrees of freedom
    assert statistic < 36.19


def test_uniform_int_sample_degenerate_and_empty_ranges():
    stream = RngStream(1)
    assert {uniform_int_sample(stream, 40, 40) for _ in range(10)} == {40}
    with pytest.raises(ValueError):
        uniform_int_sample(stream, 41, 40)
