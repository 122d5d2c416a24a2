import json
import logging
import os
from pathlib import Path
from typing import List, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from core.exceptions import ConfigError
from schemas.config import ExperimentFile, RunConfig

logger = logging.getLogger(__name__)

load_dotenv()


class Settings(BaseModel):
    redis_url: Optional[str] = None
    celery_broker_url: str = "redis://localhost:6379/0"
    celery_result_backend: Optional[str] = None
    result_webhook_url: Optional[str] = None
    log_level: str = "INFO"
    workers: int = 1
    job_time_limit_s: int = 3600


def get_settings() -> Settings:
    broker_url = os.getenv("CELERY_BROKER_URL", "redis://localhost:6379/0")
    return Settings(
        redis_url=os.getenv("REDIS_URL") or None,
        celery_broker_url=broker_url,
        celery_result_backend=os.getenv("CELERY_RESULT_BACKEND", broker_url),
        result_webhook_url=os.getenv("RESULT_WEBHOOK_URL") or None,
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        workers=int(os.getenv("FUSIONSIM_WORKERS", "1")),
        job_time_limit_s=int(os.getenv("JOB_TIME_LIMIT_S", "3600")),
    )


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"]) or "<root>"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_seed_list(raw: str) -> List[int]:
    try:
        seeds = [int(item) for item in raw.replace(" ", ",").split(",") if item]
    except ValueError as exc:
        raise ConfigError(f"seeds: cannot parse {raw!r} as a list of integers") from exc
    if not seeds:
        raise ConfigError("seeds: override list is empty")
    return seeds


def load_experiment(path: Optional[Union[str, Path]] = None, seed_override: Optional[List[int]] = None) -> ExperimentFile:
    """Read the JSON experiment file (defaults when ``path`` is None) and apply CLI overrides."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must hold a JSON object")

    if seed_override is not None:
        raw.setdefault("run", {})["seeds"] = seed_override

    try:
        experiment = ExperimentFile.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc

    logger.info(f"Loaded experiment config from {path or '<defaults>'}")
    return experiment


def run_config_with(base: RunConfig, **overrides) -> RunConfig:
    """Copy of ``base`` with fields replaced, re-validated."""
    try:
        return RunConfig.model_validate({**base.model_dump(), **overrides})
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc
