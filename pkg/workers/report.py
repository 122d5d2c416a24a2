"""
CSV emission for single runs, sweeps and budget tables.

Every file starts with a ``#`` comment block; ``# run:`` holds the
effective configuration as JSON and feeds straight back into
``RunConfig``. Values are formatted here, so the bytes written depend
only on the results.
"""
import io
import json
import logging
import sys
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import pandas as pd

from core.exceptions import ReportError
from schemas.config import RunConfig, SweepSpec
from schemas.output import BatchSummary, BudgetRow, ProfileVerdict, SweepPoint

logger = logging.getLogger(__name__)

TOOL_NAME = "fusion-node-simulator 1.0.0"

# reference SM values, echoed next to sweep output for comparison
REFERENCE_LINES = [
    "sm_latency_us sm_load=0.1 gst_load=0.1 -> 1.2, gst_load=0.89 -> 18.0",
    "sm_pdv_us rising gst_load -> 20.1 .. 411.232",
    "sm_plr sm_load=0.3 loss-free up to system_load 0.89, plr 1e-3 at system_load 0.92",
]

CLASS_COLUMNS = (
    ("generated", None),
    ("delivered", None),
    ("dropped", None),
    ("latency_mean_us", "us"),
    ("latency_min_us", "us"),
    ("latency_max_us", "us"),
    ("latency_p99_us", "us"),
    ("pdv_us", "us"),
    ("pdv_mean_us", "us"),
    ("plr", "ratio"),
    ("offered_load", "ratio"),
)


def _fmt(value: Optional[float], kind: Optional[str]) -> str:
    if value is None:
        return ""
    if kind == "us":
        return f"{value:.3f}"
    if kind == "ratio":
        return f"{value:.9f}"
    return str(value)


def summary_row(summary: BatchSummary, gst_load: float, sm_load: float) -> Dict[str, str]:
    row = {
        "gst_load": f"{gst_load:.6g}",
        "sm_load": f"{sm_load:.6g}",
        "system_load": f"{gst_load + sm_load:.6g}",
    }
    for name, agg in summary.classes.items():
        prefix = name.lower()
        for column, kind in CLASS_COLUMNS:
            if kind is None:
                row[f"{prefix}_{column}"] = str(getattr(agg, column))
            else:
                row[f"{prefix}_{column}"] = _fmt(agg.mean(column), kind)
        row[f"{prefix}_latency_mean_std_us"] = _fmt(agg.metrics["latency_mean_us"].std, "us")
        row[f"{prefix}_plr_std"] = _fmt(agg.metrics["plr"].std, "ratio")
    row["utilization"] = _fmt(summary.utilization.mean, "ratio")
    row["utilization_std"] = _fmt(summary.utilization.std, "ratio")
    return row


def config_header(config: RunConfig, sweep: Optional[SweepSpec] = None) -> List[str]:
    lines = [
        TOOL_NAME,
        f"run: {config.model_dump_json()}",
        f"overrides: {json.dumps(config.model_dump(mode='json', exclude_defaults=True), sort_keys=True)}",
        f"seeds: {' '.join(str(seed) for seed in config.seeds)}",
        f"fdl_delay_ps: {config.effective_fdl_delay_ps}",
    ]
    if sweep is not None:
        lines.append(f"sweep: {sweep.model_dump_json(exclude_none=True)}")
    return lines


def verdict_lines(verdicts: Iterable[ProfileVerdict]) -> List[str]:
    lines = []
    for verdict in verdicts:
        parts = []
        for bound, check in verdict.checks.items():
            state = "skipped" if check.passed is None else ("pass" if check.passed else "fail")
            parts.append(f"{bound}={state}")
        status = "PASS" if verdict.passed else "FAIL"
        lines.append(f"check {verdict.traffic_class} vs {verdict.profile}: {status} ({' '.join(parts)})")
    return lines


def _open(destination: str) -> Tuple[TextIO, bool]:
    if destination == "-":
        return sys.stdout, False
    try:
        return open(destination, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise ReportError(f"cannot write results to {destination}: {exc}") from exc


def emit_csv(rows: Sequence[Dict[str, str]], destination: str, comments: Sequence[str] = ()) -> None:
    """Comment block, header row, one data row per entry of ``rows``."""
    buffer = io.StringIO()
    for line in comments:
        buffer.write(f"# {line}\n")
    if rows:
        pd.DataFrame(list(rows), dtype=str).to_csv(buffer, index=False, lineterminator="\n")

    handle, owned = _open(destination)
    try:
        handle.write(buffer.getvalue())
    except OSError as exc:
        raise ReportError(f"cannot write results to {destination}: {exc}") from exc
    finally:
        if owned:
            handle.close()
    logger.info(f"Wrote {len(rows)} row(s) to {destination}")


def single_rows(config: RunConfig, summary: BatchSummary) -> List[Dict[str, str]]:
    return [summary_row(summary, config.gst_load, config.sm_load)]


def sweep_rows(points: Sequence[SweepPoint]) -> List[Dict[str, str]]:
    return [summary_row(point.summary, point.gst_load, point.sm_load) for point in points]


def budget_rows(rows: Sequence[BudgetRow]) -> List[Dict[str, str]]:
    return [
        {
            "n_nodes": str(row.n_nodes),
            "node_delay_total_us": f"{row.node_delay_total_us:.2f}",
            "link_length_km": f"{row.link_length_km:.2f}",
            "feasible": "true" if row.feasible else "false",
        }
        for row in rows
    ]


def read_results_csv(source: str) -> Tuple[List[str], pd.DataFrame]:
    """Comment lines (without ``# ``) and the data table."""
    comments = []
    with open(source, encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            comments.append(line[2:].rstrip("\n"))
    return comments, pd.read_csv(source, comment="#")


def config_from_comments(comments: Sequence[str]) -> RunConfig:
    for line in comments:
        if line.startswith("run: "):
            return RunConfig.model_validate_json(line[len("run: "):])
    raise ValueError("no 'run:' line in comment block")
