"""Scheduler service: request dispatch and the NDJSON socket round trip."""

import pytest

from robobench import recorder
from robobench.core import EvaluationParams
from robobench.scheduler import BuiltIn, JobSpec, Scheduler
from robobench.service import SchedulerService, ServiceClient, handle_request

TINY = {p: EvaluationParams(control_rate=250, episode_steps=50) for p in (1, 2, 3)}


@pytest.fixture
def sched(tmp_path):
    return Scheduler(str(tmp_path / "data"), n_robots=2, seed=0, profiles=TINY)


def spec_json(seed=1):
    return {
        "user": "alice",
        "phase": 1,
        "level": 1,
        "controller": {"builtin": "zero_torque", "params": None},
        "seed": seed,
        "goal_override": None,
    }


def test_handle_request_lifecycle(sched):
    response, extra = handle_request(sched, {"type": "submit", "spec": spec_json()})
    assert response["ok"] and extra is None
    job_id = response["job_id"]

    response, _ = handle_request(sched, {"type": "status", "job_id": job_id})
    assert response["job"]["state"] == "Queued"
    assert response["job"]["spec"]["user"] == "alice"

    sched.run_pending()
    response, data = handle_request(sched, {"type": "fetch", "job_id": job_id})
    assert response["length"] == len(data)
    assert recorder.read_log(data).job_id == job_id

    response, _ = handle_request(sched, {"type": "list"})
    assert [j["job_id"] for j in response["jobs"]] == [job_id]


def test_handle_request_unknown_type(sched):
    response, extra = handle_request(sched, {"type": "frobnicate"})
    assert not response["ok"]
    assert response["error"] == "Protocol"
    assert extra is None


def test_service_round_trip_over_socket(sched):
    service = SchedulerService(sched)
    service.start_background()
    try:
        client = ServiceClient("127.0.0.1", service.port)
        job_id = client.submit(JobSpec("bob", 1, 2, BuiltIn("zero_torque"), seed=3))
        assert client.status(job_id)["state"] == "Queued"
        sched.run_pending()
        assert client.status(job_id)["state"] == "Finished"
        log = recorder.read_log(client.fetch(job_id))
        assert log.level == 2 and log.n_steps == 50
        assert [j["job_id"] for j in client.list()] == [job_id]
        client.close()
    finally:
        service.shutdown()
        service.server_close()


def test_service_errors_are_line_responses(sched):
    service = SchedulerService(sched)
    service.start_background()
    try:
        client = ServiceClient("127.0.0.1", service.port)
        with pytest.raises(RuntimeError, match="UnknownJob"):
            client.status("missing")
        with pytest.raises(RuntimeError, match="InvalidSpec"):
            client.submit(JobSpec("bob", 9, 1, BuiltIn("zero_torque")))
        # the connection survives errors
        job_id = client.submit(JobSpec("bob", 1, 1, BuiltIn("zero_torque"), seed=1))
        assert client.status(job_id)["state"] == "Queued"
        client.close()
    finally:
        service.shutdown()
        service.server_close()


def test_service_rejects_malformed_json(sched):
    service = SchedulerService(sched)
    service.start_background()
    try:
        import json
        import socket

        sock = socket.create_connection(("127.0.0.1", service.port))
        f = sock.makefile("rwb")
        f.write(b"this is not json\n")
        f.flush()
        response = json.loads(f.readline())
        assert not response["ok"]
        assert response["error"] == "Protocol"
        f.close()
        sock.close()
    finally:
        service.shutdown()
        service.server_close()
