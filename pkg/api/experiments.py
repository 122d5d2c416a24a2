import logging
from uuid import uuid4

from fastapi import APIRouter

from core.budget import BUILTIN_PROFILES, budget_table
from core.redis_client import redis_manager
from schemas.config import BudgetSection
from schemas.jobs import ExperimentRequest, JobAccepted
from workers.celery_tasks import run_experiment_task
from workers.simulation import sweep_configs

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/experiments", response_model=JobAccepted)
async def submit_experiment(request: ExperimentRequest):
    if request.mode == "sweep":
        # every point must validate on its own (load cap), reject before queueing
        sweep_configs(request.experiment.sweep, request.experiment.run)

    job_id = str(uuid4())
    redis_manager.set_job_status(job_id, "processing")
    run_experiment_task.delay(job_id, request.model_dump(mode="json"))

    logger.info(f"Queued {request.mode} experiment as JobID: {job_id}")
    return JobAccepted(job_id=job_id, mode=request.mode)


@router.post("/budget")
async def budget(section: BudgetSection):
    rows = budget_table(section.spec(), section.node_counts())
    return {"rows": [row.model_dump() for row in rows]}


@router.get("/profiles")
async def profiles():
    return {name: profile.model_dump() for name, profile in BUILTIN_PROFILES.items()}
