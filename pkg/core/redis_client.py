import json
import logging
from typing import Any, Dict, Optional

import redis

from core.config import get_settings

logger = logging.getLogger(__name__)

_IN_MEMORY_STORE: Dict[str, Any] = {}

JOB_TTL_SECONDS = 24 * 3600


class RedisManager:
    """Experiment job status/result store. Falls back to process memory without REDIS_URL."""

    def __init__(self, url: Optional[str] = None):
        self.use_redis = False
        self.client = None

        url = url if url is not None else get_settings().redis_url
        if not url:
            logger.info("REDIS_URL not set, using in-memory job storage")
            return

        try:
            self.client = redis.Redis.from_url(url, decode_responses=True)
            self.client.ping()
            self.use_redis = True
            logger.info("Redis connected successfully")
        except redis.RedisError as e:
            logger.warning(f"Redis connection failed, using in-memory storage: {e}")
            self.client = None

    def set_job_status(self, job_id: str, status: str, ttl: int = JOB_TTL_SECONDS):
        if self.use_redis and self.client:
            self.client.setex(f"experiment:{job_id}:status", ttl, status)
        else:
            _IN_MEMORY_STORE[f"experiment:{job_id}:status"] = status

    def get_job_status(self, job_id: str) -> Optional[str]:
        if self.use_redis and self.client:
            return self.client.get(f"experiment:{job_id}:status")
        return _IN_MEMORY_STORE.get(f"experiment:{job_id}:status")

    def set_job_result(self, job_id: str, result: Dict[str, Any], ttl: int = JOB_TTL_SECONDS):
        if self.use_redis and self.client:
            self.client.setex(f"experiment:{job_id}:result", ttl, json.dumps(result))
        else:
            _IN_MEMORY_STORE[f"experiment:{job_id}:result"] = result

    def get_job_result(self, job_id: str) -> Optional[Dict[str, Any]]:
        if self.use_redis and self.client:
            result = self.client.get(f"experiment:{job_id}:result")
            return json.loads(result) if result else None
        return _IN_MEMORY_STORE.get(f"experiment:{job_id}:result")

    def job_exists(self, job_id: str) -> bool:
        if self.use_redis and self.client:
            return self.client.exists(f"experiment:{job_id}:status") > 0
        return f"experiment:{job_id}:status" in _IN_MEMORY_STORE


redis_manager = RedisManager()
