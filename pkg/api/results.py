from fastapi import APIRouter, HTTPException

from core.redis_client import redis_manager
from schemas.jobs import JobResult

router = APIRouter()

FINISHED = ("done", "failed")


@router.get("/result/{job_id}", response_model=JobResult)
async def get_result(job_id: str):
    if not redis_manager.job_exists(job_id):
        raise HTTPException(status_code=404, detail="Unknown job")

    status = redis_manager.get_job_status(job_id)
    if status not in FINISHED:
        return JobResult(job_id=job_id, status=status)

    # status is written after the result, but a TTL can expire one before the other
    result = redis_manager.get_job_result(job_id)
    if status == "failed":
        error = result.get("error") if result else None
        return JobResult(job_id=job_id, status=status, error=error, message=None if result else "No error details stored")

    if not result:
        return JobResult(job_id=job_id, status="processing", message="Result not yet available")
    return JobResult(job_id=job_id, status=status, data=result)
