import logging
import time
from typing import Any, Dict, Optional

import requests

from core.config import get_settings

logger = logging.getLogger(__name__)

ACCEPTED_STATUS = (200, 201, 202)


def _post_once(url: str, payload: Dict[str, Any]) -> bool:
    try:
        response = requests.post(url, json=payload, timeout=30)
    except requests.RequestException as exc:
        logger.error(f"Webhook error for JobID {payload['job_id']}: {exc}")
        return False

    if response.status_code in ACCEPTED_STATUS:
        return True
    logger.warning(
        f"Webhook rejected for JobID {payload['job_id']}. Status: {response.status_code}, Body: {response.text}"
    )
    return False


def send_job_webhook(
    job_id: str,
    status: str,
    data: Dict[str, Any],
    url: Optional[str] = None,
    attempts: int = 3,
    backoff_s: float = 5.0,
) -> bool:
    """
    POST ``{job_id, status, **data}`` to RESULT_WEBHOOK_URL.
    Returns False when no URL is configured or every attempt failed.
    """
    url = url or get_settings().result_webhook_url
    if not url:
        return False

    payload = {"job_id": job_id, "status": status, **data}
    for attempt in range(1, attempts + 1):
        logger.info(f"Sending {status} webhook for JobID: {job_id} (attempt {attempt}/{attempts})")
        if _post_once(url, payload):
            return True
        if attempt < attempts:
            time.sleep(backoff_s * attempt)

    logger.error(f"Giving up on webhook for JobID {job_id} after {attempts} attempts")
    return False
