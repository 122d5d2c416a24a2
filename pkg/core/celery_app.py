import ssl
from typing import Optional

from celery import Celery

from core.config import Settings, get_settings

SIMULATION_QUEUE = "simulation"


def _tls_options(url: str) -> Optional[dict]:
    if url.startswith("rediss://"):
        return {"ssl_cert_reqs": ssl.CERT_NONE}
    return None


def make_celery(settings: Settings) -> Celery:
    """Celery app for experiment jobs. One job per worker process at a time."""
    broker_url = settings.celery_broker_url
    app = Celery(
        "fusion_node_simulator",
        broker=broker_url,
        backend=settings.celery_result_backend or broker_url,
        include=["workers.celery_tasks"],
    )
    tls = _tls_options(broker_url)
    app.conf.update(
        task_serializer="json",
        accept_content=["json"],
        result_serializer="json",
        timezone="UTC",
        enable_utc=True,
        task_track_started=True,
        task_default_queue=SIMULATION_QUEUE,
        task_time_limit=settings.job_time_limit_s,
        task_soft_time_limit=max(settings.job_time_limit_s - 60, 1),
        broker_connection_retry_on_startup=True,
        broker_use_ssl=tls,
        redis_backend_use_ssl=tls,
        broker_transport_options={
            # a long sweep must not be redelivered while still running
            "visibility_timeout": settings.job_time_limit_s,
            "socket_connect_timeout": 10,
            "socket_timeout": 30,
            "retry_on_timeout": True,
        },
        worker_prefetch_multiplier=1,
        task_acks_late=True,
        worker_max_tasks_per_child=10,
        worker_concurrency=1,
    )
    return app


celery_app = make_celery(get_settings())
