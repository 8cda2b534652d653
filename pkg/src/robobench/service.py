"""Newline-delimited JSON service exposing the scheduler over a socket.

Requests are one JSON object per line: {"type": "submit" | "status" |
"fetch" | "list", ...}.  Responses are one JSON line each, except fetch,
which sends a JSON header line announcing the byte length and then the
raw log bytes.
"""

import json
import socket
import socketserver
import threading

from .errors import RoboBenchError
from .scheduler import JobSpec, _spec_from_json, _spec_to_json


def _record_to_json(record):
    return {
        "job_id": record.job_id,
        "state": record.state,
        "robot_id": record.robot_id,
        "submitted": record.submitted,
        "started": record.started,
        "ended": record.ended,
        "result_ref": record.result_ref,
        "failure_reason": record.failure_reason,
        "spec": _spec_to_json(record.spec),
    }


def handle_request(scheduler, request):
    """Dispatch one parsed request dict.

    Returns (response_dict, extra_bytes); extra_bytes is None except for
    a successful fetch.
    """
    kind = request.get("type")
    if kind == "submit":
        spec = _spec_from_json(request["spec"])
        job_id = scheduler.submit_job(spec)
        return {"ok": True, "job_id": job_id}, None
    if kind == "status":
        record = scheduler.job_status(request["job_id"])
        return {"ok": True, "job": _record_to_json(record)}, None
    if kind == "fetch":
        data = scheduler.fetch_result(request["job_id"])
        return {"ok": True, "job_id": request["job_id"], "length": len(data)}, data
    if kind == "list":
        jobs = [_record_to_json(r) for r in scheduler.list_jobs()]
        return {"ok": True, "jobs": jobs}, None
    return {"ok": False, "error": "Protocol", "message": f"unknown request type {kind!r}"}, None


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        scheduler = self.server.scheduler
        for line in self.rfile:
            line = line.strip()
            if not line:
                continue
            try:
                request = json.loads(line)
                response, extra = handle_request(scheduler, request)
            except RoboBenchError as exc:
                response = {"ok": False, "error": type(exc).__name__, "message": str(exc)}
                extra = None
            except (ValueError, KeyError, TypeError) as exc:
                response = {"ok": False, "error": "Protocol", "message": str(exc)}
                extra = None
            self.wfile.write((json.dumps(response) + "\n").encode())
            if extra is not None:
                self.wfile.write(extra)
            self.wfile.flush()


class SchedulerService(socketserver.ThreadingTCPServer):
    """TCP server wrapping one Scheduler; one thread per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, scheduler, address=("127.0.0.1", 0)):
        super().__init__(address, _Handler)
        self.scheduler = scheduler

    @property
    def port(self):
        return self.server_address[1]

    def start_background(self):
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


class ServiceClient:
    """Line-oriented client for SchedulerService."""

    def __init__(self, host, port):
        self._sock = socket.create_connection((host, port))
        self._file = self._sock.makefile("rwb")

    def close(self):
        self._file.close()
        self._sock.close()

    def _roundtrip(self, request):
        self._file.write((json.dumps(request) + "\n").encode())
        self._file.flush()
        response = json.loads(self._file.readline())
        if not response.get("ok"):
            raise RuntimeError(f"{response.get('error')}: {response.get('message')}")
        return response

    def submit(self, spec: JobSpec):
        return self._roundtrip({"type": "submit", "spec": _spec_to_json(spec)})["job_id"]

    def status(self, job_id):
        return self._roundtrip({"type": "status", "job_id": job_id})["job"]

    def fetch(self, job_id):
        response = self._roundtrip({"type": "fetch", "job_id": job_id})
        remaining = response["length"]
        chunks = []
        while remaining:
            chunk = self._file.read(remaining)
            if not chunk:
                raise RuntimeError("connection closed mid-fetch")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def list(self):
        return self._roundtrip({"type": "list"})["jobs"]
