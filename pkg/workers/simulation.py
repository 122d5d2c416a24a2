import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from core.budget import check_profile, observed_qos, resolve_profiles
from core.config import run_config_with
from core.exceptions import ConfigError
from core.event_log import EventLog, LogRecord
from core.fusion_node import FusionNode, SchedulerMode, StrictPriorityNode
from core.metrics import ClassMetrics, aggregate, summarize
from core.sim_kernel import RngStream, Simulator, ps_to_us
from core.traffic import TrafficClass, TrafficSource
from schemas.config import ExperimentFile, RunConfig, SweepSpec
from schemas.output import BatchSummary, ProfileVerdict, SeedResult, SweepPoint

logger = logging.getLogger(__name__)


@dataclass
class SeedRun:
    result: SeedResult
    metrics: Dict[str, ClassMetrics]
    records: Optional[List[LogRecord]] = field(default=None, repr=False)


def simulate_seed(config: RunConfig, seed: int, trace: bool = False) -> SeedRun:
    """One sub-simulation: build the node and sources, run, drain, summarize."""
    event_log = EventLog() if trace else None
    sim = Simulator(event_log=event_log)
    params = config.node_params()
    specs = config.traffic_specs()
    metrics = {spec.traffic_class: ClassMetrics(traffic_class=spec.traffic_class.value) for spec in specs}

    if config.scheduler_mode is SchedulerMode.FUSION:
        node = FusionNode(sim, params, metrics)
        sinks = {TrafficClass.GST: node.on_gst_arrival, TrafficClass.SM: node.on_sm_arrival}
    else:
        node = StrictPriorityNode(sim, params, metrics)
        sinks = {TrafficClass.HP: node.on_hp_arrival, TrafficClass.LP: node.on_lp_arrival}

    for index, spec in enumerate(specs):
        stream = RngStream(seed, index)
        TrafficSource(spec, config.link_capacity_bps, stream, sinks[spec.traffic_class]).attach(sim)

    sim.run(config.n_packets)

    elapsed = sim.clock
    utilization = node.link.busy_time / elapsed if elapsed else 0.0
    result = SeedResult(
        seed=seed,
        classes={m.traffic_class: summarize(m, config.link_capacity_bps) for m in metrics.values()},
        utilization=utilization,
        elapsed_us=ps_to_us(elapsed),
        buffer_peak_bytes=node.buffer_peak_bytes,
        events_dispatched=sim.events_dispatched,
    )
    logger.debug(
        f"seed={seed} gst_load={config.gst_load} sm_load={config.sm_load} "
        f"events={sim.events_dispatched} utilization={utilization:.4f}"
    )
    return SeedRun(
        result=result,
        metrics={m.traffic_class: m for m in metrics.values()},
        records=event_log.records if event_log is not None else None,
    )


def _seed_task(args: Tuple[str, int, bool]) -> SeedRun:
    config_json, seed, trace = args
    return simulate_seed(RunConfig.model_validate_json(config_json), seed, trace)


def run_seeds(config: RunConfig, workers: int = 1, trace: bool = False) -> List[SeedRun]:
    """All seeds of one configuration, returned in seed order."""
    if workers <= 1 or len(config.seeds) == 1:
        return [simulate_seed(config, seed, trace) for seed in config.seeds]

    payload = config.model_dump_json()
    with ProcessPoolExecutor(max_workers=min(workers, len(config.seeds))) as pool:
        # map() yields in submission order, so output never depends on scheduling
        return list(pool.map(_seed_task, [(payload, seed, trace) for seed in config.seeds]))


def run_single(config: RunConfig, workers: int = 1, trace: bool = False) -> Tuple[BatchSummary, List[SeedRun]]:
    logger.info(
        f"Running {len(config.seeds)} seed(s): mode={config.scheduler_mode.value} "
        f"gst_load={config.gst_load} sm_load={config.sm_load} n_packets={config.n_packets}"
    )
    runs = run_seeds(config, workers=workers, trace=trace)
    summary = aggregate([run.result for run in runs])
    logger.info(f"Batch finished: utilization={summary.utilization.mean}")
    return summary, runs


def sweep_configs(spec: SweepSpec, base: RunConfig) -> List[Tuple[float, RunConfig]]:
    """Validate every sweep point up front so a bad point fails before any work runs."""
    return [(value, run_config_with(base, **{spec.parameter: value})) for value in spec.points()]


def run_sweep(spec: SweepSpec, base: RunConfig, workers: int = 1) -> List[SweepPoint]:
    points = []
    configs = sweep_configs(spec, base)
    for index, (value, config) in enumerate(configs, start=1):
        logger.info(f"Sweep point {index}/{len(configs)}: {spec.parameter}={value}")
        summary, _ = run_single(config, workers=workers)
        points.append(
            SweepPoint(
                parameter=spec.parameter,
                value=value,
                gst_load=config.gst_load,
                sm_load=config.sm_load,
                summary=summary,
            )
        )
    return points


def run_checks(experiment: ExperimentFile, summary: BatchSummary) -> List[ProfileVerdict]:
    profiles = resolve_profiles(experiment.profiles)
    verdicts = []
    for check in experiment.checks:
        name = check.traffic_class.value
        if name not in summary.classes:
            logger.info(f"Skipping {name} vs {check.profile}: class not present in this scheduler mode")
            continue
        if check.profile not in profiles:
            raise ConfigError(f"checks: unknown profile {check.profile!r}")
        verdict = check_profile(observed_qos(summary.classes[name]), profiles[check.profile], traffic_class=name)
        logger.info(f"{name} vs {check.profile}: {'PASS' if verdict.passed else 'FAIL'}")
        verdicts.append(verdict)
    return verdicts
