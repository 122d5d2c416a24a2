import pytest

from core.config import run_config_with
from core.event_log import LogRecord, audit_event_log, link_violations, read_event_log, write_event_log
from core.exceptions import ConfigError, ReportError
from schemas.config import ExperimentFile, ProfileCheck, RunConfig, SweepSpec
from workers.simulation import run_checks, run_single, run_sweep, simulate_seed

AUDITED_FIELDS = ("generated", "delivered", "dropped", "sum_delay", "min_delay", "max_delay", "offered_bytes")


@pytest.fixture
def loaded_run():
    config = RunConfig(gst_load=0.5, sm_load=0.3, n_packets=2000, seeds=[907])
    return config, simulate_seed(config, 907, trace=True)


def test_gst_is_untouched_by_sm(loaded_run):
    _, run = loaded_run
    gst = run.result.classes["GST"]
    assert gst.generated == gst.delivered >= 2000
    assert gst.latency_min_us == gst.latency_max_us == pytest.approx(1.2)
    assert gst.pdv_us == 0
    assert gst.plr == 0


def test_sm_conservation_and_no_loss_below_the_knee(loaded_run):
    _, run = loaded_run
    sm = run.result.classes["SM"]
    assert sm.generated >= 2000
    assert min(sm.generated, run.result.classes["GST"].generated) == 2000
    assert sm.generated == sm.delivered + sm.dropped
    assert sm.plr == 0
    assert sm.pdv_us > 0
    assert 0 < run.result.utilization <= 1


def test_incremental_metrics_match_the_event_log(loaded_run):
    _, run = loaded_run
    audited = audit_event_log(run.records, ["GST", "SM"])
    for name, live in run.metrics.items():
        for field in AUDITED_FIELDS:
            assert getattr(audited[name], field) == getattr(live, field), (name, field)


def test_event_log_shows_a_clean_link(loaded_run):
    config, run = loaded_run
    assert link_violations(run.records, config.link_capacity_bps, config.effective_fdl_delay_ps) == []


def test_event_log_file_reads_back(loaded_run, tmp_path):
    _, run = loaded_run
    path = tmp_path / "events.log"
    write_event_log(path, [(907, run.records)])
    assert read_event_log(path) == {907: run.records}


def test_unwritable_event_log(loaded_run, tmp_path):
    _, run = loaded_run
    with pytest.raises(ReportError):
        write_event_log(tmp_path / "missing" / "events.log", [(907, run.records)])


def test_same_seed_same_result():
    config = RunConfig(gst_load=0.4, sm_load=0.4, n_packets=500, seeds=[1])
    assert simulate_seed(config, 1).result == simulate_seed(config, 1).result
    assert simulate_seed(config, 1).result != simulate_seed(config, 2).result


def test_null_experiment():
    config = RunConfig(gst_load=0.0, sm_load=0.0, n_packets=100, seeds=[1])
    run = simulate_seed(config, 1)
    assert run.result.classes["GST"].generated == 0
    assert run.result.classes["SM"].latency_mean_us is None
    assert run.result.utilization == 0


def test_zero_packets_ends_immediately():
    run = simulate_seed(RunConfig(gst_load=0.5, sm_load=0.3, n_packets=0, seeds=[1]), 1)
    assert run.result.events_dispatched == 0


def test_batch_over_seeds_has_zero_gst_spread():
    config = RunConfig(gst_load=0.5, sm_load=0.3, n_packets=300, seeds=[907, 234, 326])
    summary, runs = run_single(config)

    assert [run.result.seed for run in runs] == [907, 234, 326]
    gst = summary.classes["GST"]
    assert gst.metrics["latency_mean_us"].std == 0
    assert gst.metrics["plr"].std == 0
    assert gst.mean("latency_mean_us") == pytest.approx(1.2)


def test_strict_priority_mode_reports_hp_and_lp():
    config = RunConfig(gst_load=0.5, sm_load=0.3, n_packets=2000, seeds=[1], scheduler_mode="strict_priority")
    run = simulate_seed(config, 1)
    hp = run.result.classes["HP"]
    assert set(run.result.classes) == {"HP", "LP"}
    assert hp.delivered == hp.generated >= 2000
    assert run.result.classes["LP"].generated == 2000
    assert hp.pdv_us > 0
    # non-preemptive: HP never waits longer than one full LP frame
    assert hp.latency_max_us <= 1.2 + 1e-9


def test_checks_against_profiles():
    experiment = ExperimentFile(
        run=RunConfig(gst_load=0.5, sm_load=0.3, n_packets=300, seeds=[1]),
        checks=[
            ProfileCheck(traffic_class="GST", profile="fronthaul"),
            ProfileCheck(traffic_class="HP", profile="fronthaul"),
        ],
    )
    summary, _ = run_single(experiment.run)
    verdicts = run_checks(experiment, summary)

    assert [v.traffic_class for v in verdicts] == ["GST"]
    assert verdicts[0].passed


def test_unknown_profile_is_a_config_error():
    experiment = ExperimentFile(
        run=RunConfig(gst_load=0.5, n_packets=10, seeds=[1]),
        checks=[ProfileCheck(traffic_class="GST", profile="no_such_profile")],
    )
    summary, _ = run_single(experiment.run)
    with pytest.raises(ConfigError):
        run_checks(experiment, summary)


def test_sweep_yields_one_point_per_value():
    base = RunConfig(sm_load=0.3, n_packets=200, seeds=[1])
    points = run_sweep(SweepSpec(parameter="gst_load", values=[0.1, 0.3]), base)

    assert [p.gst_load for p in points] == [0.1, 0.3]
    assert all(p.sm_load == 0.3 for p in points)
    assert all(p.summary.classes["GST"].mean("pdv_us") == 0 for p in points)


def test_bad_sweep_point_fails_before_running():
    base = RunConfig(sm_load=0.3, n_packets=200, seeds=[1])
    with pytest.raises(ConfigError):
        run_sweep(SweepSpec(parameter="gst_load", values=[0.1, 0.8]), base)


@pytest.mark.slow
def test_stable_sm_points_are_ordered_and_lossless():
    base = RunConfig(sm_load=0.3, n_packets=10_000, seeds=[907, 234])
    points = run_sweep(SweepSpec(parameter="gst_load", values=[0.1, 0.3, 0.5]), base)
    latencies = [p.summary.classes["SM"].mean("latency_mean_us") for p in points]
    assert latencies == sorted(latencies)
    assert all(p.summary.classes["SM"].mean("plr") == 0 for p in points)


def test_gst_keeps_arriving_until_sm_reaches_its_count():
    config = RunConfig(gst_load=0.8, sm_load=0.1, n_packets=2000, seeds=[907])
    run = simulate_seed(config, 907)
    gst, sm = run.metrics["GST"], run.metrics["SM"]

    assert sm.generated == 2000
    # about 0.83 GST frames per us against 0.16 SM frames per us
    assert gst.generated > 4 * sm.generated
    assert gst.last_arrival == pytest.approx(sm.last_arrival, rel=0.01)
    assert run.result.utilization > 0.75


def test_fusion_removes_the_pdv_strict_priority_adds():
    fusion = RunConfig(gst_load=0.5, sm_load=0.3, n_packets=2000, seeds=[1])
    strict = run_config_with(fusion, scheduler_mode="strict_priority")

    gst = simulate_seed(fusion, 1).result.classes["GST"]
    hp = simulate_seed(strict, 1).result.classes["HP"]

    assert gst.pdv_us == 0
    assert hp.pdv_us > 0
    assert hp.latency_max_us <= 1.2 + 1e-9


def test_lossy_run_keeps_sm_order_in_the_event_log():
    config = RunConfig(gst_load=0.5, sm_load=0.45, n_packets=2000, buffer_capacity_bytes=6000, seeds=[3])
    run = simulate_seed(config, 3, trace=True)

    assert run.metrics["SM"].dropped > 0
    assert link_violations(run.records, config.link_capacity_bps, config.effective_fdl_delay_ps) == []


def test_event_log_order_check_skips_drops_and_flags_overtaking():
    arrivals = [
        LogRecord(0, "SM_ARRIVAL", 1, "SM", 100),
        LogRecord(10, "SM_ARRIVAL", 2, "SM", 100),
        LogRecord(10, "DROP", 2, "SM", 100),
        LogRecord(20, "SM_ARRIVAL", 3, "SM", 100),
    ]
    in_order = arrivals + [LogRecord(30, "TX_START", 1, "SM", 100), LogRecord(200_000, "TX_START", 3, "SM", 100)]
    overtaken = arrivals + [LogRecord(30, "TX_START", 3, "SM", 100), LogRecord(200_000, "TX_START", 1, "SM", 100)]

    assert link_violations(in_order, 10_000_000_000) == []
    assert link_violations(overtaken, 10_000_000_000) == ["SM frames left the node out of arrival order"]


@pytest.fixture(scope="module")
def full_length_batch():
    config = RunConfig(gst_load=0.4, sm_load=0.3, seeds=[907, 234, 326, 104])
    summary, _ = run_single(config)
    return config, summary


@pytest.mark.slow
def test_offered_load_matches_the_configuration(full_length_batch):
    config, summary = full_length_batch
    for name, target in (("GST", config.gst_load), ("SM", config.sm_load)):
        per_seed = [seed.classes[name].offered_load for seed in summary.seeds]
        assert all(value == pytest.approx(target, abs=0.01) for value in per_seed), (name, per_seed)
        assert summary.classes[name].mean("offered_load") == pytest.approx(target, rel=0.01)


@pytest.mark.slow
def test_utilization_equals_carried_load(full_length_batch):
    _, summary = full_length_batch
    for seed in summary.seeds:
        carried = sum(c.offered_load * (1 - c.plr) for c in seed.classes.values())
        assert seed.utilization == pytest.approx(carried, rel=0.01)


@pytest.fixture(scope="module")
def light_sm_sweep():
    base = RunConfig(sm_load=0.1, seeds=[907])
    return run_sweep(SweepSpec(parameter="gst_load", values=[0.1, 0.5, 0.8, 0.89]), base)


@pytest.mark.slow
def test_sm_latency_rises_with_gst_load(light_sm_sweep):
    latencies = [p.summary.classes["SM"].mean("latency_mean_us") for p in light_sm_sweep]
    assert all(a < b for a, b in zip(latencies, latencies[1:])), latencies
    assert latencies[-1] >= 5 * latencies[0]


@pytest.mark.slow
def test_sm_pdv_spans_an_order_of_magnitude(light_sm_sweep):
    pdvs = [p.summary.classes["SM"].mean("pdv_us") for p in light_sm_sweep]
    assert pdvs[0] > 0
    assert all(a < b for a, b in zip(pdvs, pdvs[1:])), pdvs
    assert pdvs[-1] >= 10 * pdvs[0]


@pytest.mark.slow
def test_no_sm_loss_up_to_system_load_088():
    base = RunConfig(sm_load=0.3, seeds=[907, 234])
    points = run_sweep(SweepSpec(parameter="gst_load", values=[0.2, 0.4, 0.58]), base)
    assert [p.summary.classes["SM"].mean("plr") for p in points] == [0, 0, 0]
    assert all(p.summary.classes["GST"].mean("pdv_us") == 0 for p in points)
