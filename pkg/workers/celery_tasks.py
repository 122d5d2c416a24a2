import logging
import traceback
from typing import Any, Dict

import redis
from celery.exceptions import SoftTimeLimitExceeded
from pydantic import ValidationError

from core.logging_utils import setup_logging

# Initialize global logging to stdout for worker log streaming
setup_logging(level=logging.INFO)

from core.budget import budget_table
from core.celery_app import celery_app
from core.exceptions import ConfigError, InvariantViolation
from core.redis_client import redis_manager
from core.webhook_client import send_job_webhook
from schemas.jobs import ExperimentRequest
from workers.simulation import run_checks, run_single, run_sweep

logger = logging.getLogger(__name__)


def execute_experiment(request: ExperimentRequest) -> Dict[str, Any]:
    """JSON-ready result for one job. Seeds run sequentially inside a worker."""
    experiment = request.experiment
    if request.mode == "budget":
        section = experiment.budget
        rows = budget_table(section.spec(), section.node_counts())
        return {"mode": "budget", "rows": [row.model_dump() for row in rows]}

    if request.mode == "sweep":
        points = run_sweep(experiment.sweep, experiment.run)
        return {"mode": "sweep", "points": [point.model_dump(mode="json") for point in points]}

    summary, _ = run_single(experiment.run)
    verdicts = run_checks(experiment, summary)
    return {
        "mode": "single",
        "summary": summary.model_dump(mode="json"),
        "checks": [verdict.model_dump(mode="json") for verdict in verdicts],
    }


def mark_failed(job_id: str, exc: BaseException) -> None:
    try:
        redis_manager.set_job_result(job_id, {"error": str(exc)})
    except redis.RedisError as store_exc:
        logger.error(f"Could not store the error for JobID {job_id}: {store_exc}")
    try:
        redis_manager.set_job_status(job_id, "failed")
    except redis.RedisError as store_exc:
        logger.error(f"Could not record failure for JobID {job_id}: {store_exc}")
    send_job_webhook(job_id, "failed", {"error": str(exc)})


@celery_app.task(bind=True, max_retries=3)
def run_experiment_task(self, job_id: str, payload: dict):
    logger.info(f"Celery experiment started for JobID: {job_id}")
    try:
        redis_manager.set_job_status(job_id, "processing")
        request = ExperimentRequest(**payload)
        result = execute_experiment(request)
        redis_manager.set_job_result(job_id, result)
        redis_manager.set_job_status(job_id, "done")
    except redis.RedisError as exc:
        if self.request.retries >= self.max_retries:
            logger.error(f"Job store still unavailable for JobID {job_id}, giving up: {exc}")
            mark_failed(job_id, exc)
            raise
        logger.error(f"Job store unavailable for JobID {job_id}: {exc}")
        raise self.retry(exc=exc, countdown=backoff(self.request.retries))
    except (ValidationError, ConfigError, InvariantViolation, SoftTimeLimitExceeded) as exc:
        # a retry would fail the same way
        logger.error(f"Experiment failed for JobID {job_id}: {exc}")
        mark_failed(job_id, exc)
        return
    except Exception as exc:
        logger.error(f"Experiment crashed for JobID {job_id}. Err: {exc}\n{traceback.format_exc()}")
        mark_failed(job_id, exc)
        raise

    logger.info(f"Job {job_id} finished ({result['mode']})")
    send_job_webhook(job_id, "done", {"mode": result["mode"]})


def backoff(retries: int) -> int:
    return 30 * (2 ** retries)
