"""
Command line runner.

    python cli.py --mode single --config experiment.json --out results.csv
    python cli.py --mode sweep  --config sweep.json --out sweep.csv --workers 4
    python cli.py --mode budget --out budget.csv

Exit codes: 0 success, 2 configuration or I/O error, 3 invariant violation.
"""
import logging
import sys

import click

from core.budget import budget_table
from core.config import get_settings, load_experiment, parse_seed_list
from core.event_log import write_event_log
from core.exceptions import ConfigError, InvariantViolation, ReportError
from core.logging_utils import setup_logging
from workers.report import (
    REFERENCE_LINES,
    TOOL_NAME,
    budget_rows,
    config_header,
    emit_csv,
    single_rows,
    sweep_rows,
    verdict_lines,
)
from workers.simulation import run_checks, run_single, run_sweep

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _run(experiment, mode: str, out: str, event_log: str, workers: int) -> None:
    if mode == "budget":
        section = experiment.budget
        rows = budget_table(section.spec(), section.node_counts())
        comments = [TOOL_NAME, f"budget: {section.model_dump_json()}"]
        emit_csv(budget_rows(rows), out, comments)
        return

    config = experiment.run
    if mode == "sweep":
        if experiment.sweep is None:
            raise ConfigError("sweep: --mode sweep needs a 'sweep' section in the config")
        if event_log:
            logger.warning("--event-log is only written in single mode; ignoring it")
        points = run_sweep(experiment.sweep, config, workers=workers)
        comments = config_header(config, experiment.sweep) + [f"reference: {line}" for line in REFERENCE_LINES]
        emit_csv(sweep_rows(points), out, comments)
        return

    summary, runs = run_single(config, workers=workers, trace=bool(event_log))
    verdicts = run_checks(experiment, summary)
    emit_csv(single_rows(config, summary), out, config_header(config) + verdict_lines(verdicts))
    if event_log:
        write_event_log(event_log, [(run.result.seed, run.records) for run in runs])


def _configure(log_level):
    try:
        settings = get_settings()
        setup_logging(level=log_level or settings.log_level, stream=sys.stderr)
    except ValueError as exc:
        raise ConfigError(f"environment or --log-level: {exc}") from exc
    return settings


@click.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON experiment file.")
@click.option("--out", "out", default="-", show_default=True, help="CSV destination, '-' for stdout.")
@click.option("--mode", type=click.Choice(["single", "sweep", "budget"]), default="single", show_default=True)
@click.option("--seed-override", help="Comma-separated seeds replacing run.seeds.")
@click.option("--event-log", "event_log", type=click.Path(dir_okay=False), help="Write the raw event log here.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel seeds per batch.")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING ...")
def main(config_path, out, mode, seed_override, event_log, workers, log_level):
    try:
        settings = _configure(log_level)
        seeds = parse_seed_list(seed_override) if seed_override else None
        experiment = load_experiment(config_path, seed_override=seeds)
        _run(experiment, mode, out, event_log, workers or settings.workers)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except ReportError as exc:
        click.echo(f"output error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except InvariantViolation as exc:
        logger.error(f"Simulation halted: {exc}")
        click.echo(f"invariant violation: {exc}", err=True)
        sys.exit(EXIT_INVARIANT)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
