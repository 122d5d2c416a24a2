from types import SimpleNamespace

import pytest
import redis
from fastapi.testclient import TestClient

import api.experiments as experiments
import workers.celery_tasks as celery_tasks
from core.redis_client import redis_manager
from main import app

SMALL_EXPERIMENT = {"run": {"gst_load": 0.5, "sm_load": 0.3, "n_packets": 200, "seeds": [1]}}


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def queued(monkeypatch):
    calls = []
    monkeypatch.setattr(
        experiments, "run_experiment_task", SimpleNamespace(delay=lambda *args: calls.append(args))
    )
    return calls


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["service"] == "fusion-node-simulator"


def test_submit_experiment_queues_a_job(client, queued):
    response = client.post("/api/experiments", json={"mode": "single", "experiment": SMALL_EXPERIMENT})

    assert response.status_code == 200
    job_id = response.json()["job_id"]
    assert queued[0][0] == job_id
    assert queued[0][1]["experiment"]["run"]["gst_load"] == 0.5
    assert redis_manager.get_job_status(job_id) == "processing"

    pending = client.get(f"/api/result/{job_id}").json()
    assert pending["status"] == "processing"


def test_invalid_experiment_is_rejected(client, queued):
    assert client.post("/api/experiments", json={"mode": "sweep"}).status_code == 422
    overloaded = {"run": {"gst_load": 0.9, "sm_load": 0.4}}
    assert client.post("/api/experiments", json={"experiment": overloaded}).status_code == 422
    assert queued == []


def test_unknown_job(client):
    assert client.get("/api/result/nope").status_code == 404


def test_budget_endpoint(client):
    response = client.post("/api/budget", json={"n_min": 2, "n_max": 6})
    rows = response.json()["rows"]
    assert [round(row["link_length_km"], 2) for row in rows] == [9.52, 9.28, 9.04, 8.80, 8.56]


def test_worker_stores_single_run_result(client):
    run_payload = {"mode": "single", "experiment": SMALL_EXPERIMENT}
    celery_tasks.run_experiment_task("job-single", run_payload)

    body = client.get("/api/result/job-single").json()
    assert body["status"] == "done"
    summary = body["data"]["summary"]
    assert summary["classes"]["GST"]["metrics"]["latency_max_us"]["mean"] == pytest.approx(1.2)
    assert body["data"]["checks"][0]["passed"] is True


def test_worker_runs_budget_and_sweep_jobs():
    celery_tasks.run_experiment_task("job-budget", {"mode": "budget"})
    assert len(redis_manager.get_job_result("job-budget")["rows"]) == 5

    sweep = dict(SMALL_EXPERIMENT, sweep={"parameter": "gst_load", "values": [0.1, 0.2]})
    celery_tasks.run_experiment_task("job-sweep", {"mode": "sweep", "experiment": sweep})
    points = redis_manager.get_job_result("job-sweep")["points"]
    assert [p["gst_load"] for p in points] == [0.1, 0.2]


def test_worker_marks_bad_experiments_failed(client):
    payload = {"experiment": {"run": {"gst_load": 0.9, "sm_load": 0.4}}}
    celery_tasks.run_experiment_task("job-bad", payload)

    body = client.get("/api/result/job-bad").json()
    assert body["status"] == "failed"
    assert "gst_load + sm_load" in body["error"]


def test_worker_notifies_webhook(monkeypatch):
    sent = []
    monkeypatch.setattr(celery_tasks, "send_job_webhook", lambda *args: sent.append(args))
    celery_tasks.run_experiment_task("job-hook", {"mode": "budget"})
    assert sent == [("job-hook", "done", {"mode": "budget"})]


def test_job_store_outage_is_retried(monkeypatch):
    def unavailable(*args, **kwargs):
        raise redis.ConnectionError("store down")

    monkeypatch.setattr(celery_tasks.redis_manager, "set_job_status", unavailable)
    # called directly, retry() re-raises the original error
    with pytest.raises(redis.ConnectionError):
        celery_tasks.run_experiment_task("job-retry", {"mode": "budget"})


def test_exhausted_retries_mark_the_job_failed(monkeypatch, client):
    def unavailable(*args, **kwargs):
        raise redis.ConnectionError("store down")

    monkeypatch.setattr(celery_tasks.run_experiment_task, "max_retries", 0)
    monkeypatch.setattr(celery_tasks.redis_manager, "set_job_result", unavailable)
    with pytest.raises(redis.ConnectionError):
        celery_tasks.run_experiment_task("job-exhausted", {"mode": "budget"})

    assert client.get("/api/result/job-exhausted").json()["status"] == "failed"


def test_unexpected_errors_mark_the_job_failed(monkeypatch, client):
    def crash(request):
        raise RuntimeError("worker crashed")

    sent = []
    monkeypatch.setattr(celery_tasks, "execute_experiment", crash)
    monkeypatch.setattr(celery_tasks, "send_job_webhook", lambda *args: sent.append(args))
    with pytest.raises(RuntimeError):
        celery_tasks.run_experiment_task("job-crash", {"mode": "budget"})

    body = client.get("/api/result/job-crash").json()
    assert body["status"] == "failed"
    assert body["error"] == "worker crashed"
    assert sent == [("job-crash", "failed", {"error": "worker crashed"})]


def test_sweep_with_an_overloaded_point_is_rejected(client, queued):
    sweep = dict(SMALL_EXPERIMENT, sweep={"parameter": "gst_load", "values": [0.1, 0.8]})
    response = client.post("/api/experiments", json={"mode": "sweep", "experiment": sweep})

    assert response.status_code == 422
    assert "gst_load + sm_load" in response.json()["detail"]
    assert queued == []


def test_builtin_profiles(client):
    profiles = client.get("/api/profiles").json()
    assert profiles["fronthaul"]["jitter_bound_us"] == 5.0
    assert profiles["interactive_messaging_100ms"]["jitter_bound_us"] is None
