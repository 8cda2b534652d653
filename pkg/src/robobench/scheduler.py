"""Cluster-style job submission: queue, random robot assignment, execution,
journaling and result storage.

Jobs move Queued -> Running -> Finished/Failed.  Every transition is
appended to a line-delimited JSON journal that recovery replays.
"""

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from . import controllers as controllers_mod
from . import episode as episode_mod
from .core import EvaluationParams, Goal, Pose
from .errors import InvalidSpec, NotFinished, NothingToAssign, UnknownJob
from .recorder import FILE_EXTENSION, write_log_file

QUEUED = "Queued"
RUNNING = "Running"
FINISHED = "Finished"
FAILED = "Failed"


@dataclass(frozen=True)
class BuiltIn:
    name: str
    params: dict = None


@dataclass(frozen=True)
class External:
    command: str


@dataclass(frozen=True)
class JobSpec:
    user: str
    phase: int
    level: int
    controller: object  # BuiltIn or External
    seed: int = None
    goal_override: Goal = None


@dataclass
class JobRecord:
    job_id: str
    spec: JobSpec
    state: str = QUEUED
    robot_id: str = None
    submitted: float = None
    started: float = None
    ended: float = None
    result_ref: str = None
    failure_reason: str = None


def validate_spec(spec):
    if spec.phase not in (1, 2, 3):
        raise InvalidSpec(f"phase must be 1..3, got {spec.phase}")
    if spec.level not in (1, 2, 3, 4):
        raise InvalidSpec(f"level must be 1..4, got {spec.level}")
    if isinstance(spec.controller, BuiltIn):
        if spec.controller.name not in controllers_mod.REGISTRY:
            raise InvalidSpec(f"unknown built-in controller {spec.controller.name!r}")
    elif isinstance(spec.controller, External):
        if not spec.controller.command or not str(spec.controller.command).strip():
            raise InvalidSpec("external controller command must be non-empty")
    else:
        raise InvalidSpec(f"controller must be BuiltIn or External, got {type(spec.controller)}")


def _spec_to_json(spec):
    if isinstance(spec.controller, BuiltIn):
        controller = {"builtin": spec.controller.name, "params": spec.controller.params}
    else:
        controller = {"external": spec.controller.command}
    goal = None
    if spec.goal_override is not None:
        goal = {
            "level": spec.goal_override.level,
            "position": [float(v) for v in spec.goal_override.pose.position],
            "orientation": [float(v) for v in spec.goal_override.pose.orientation],
        }
    return {
        "user": spec.user,
        "phase": spec.phase,
        "level": spec.level,
        "controller": controller,
        "seed": spec.seed,
        "goal_override": goal,
    }


def _spec_from_json(data):
    raw = data["controller"]
    if "builtin" in raw:
        controller = BuiltIn(raw["builtin"], raw.get("params"))
    else:
        controller = External(raw["external"])
    goal = None
    if data.get("goal_override"):
        g = data["goal_override"]
        goal = Goal(g["level"], Pose(np.array(g["position"]), np.array(g["orientation"])))
    return JobSpec(
        user=data["user"],
        phase=data["phase"],
        level=data["level"],
        controller=controller,
        seed=data.get("seed"),
        goal_override=goal,
    )


class Scheduler:
    """One coordination context plus one worker per robot.

    submit/status/fetch are thread-safe; the journal has a single writer.
    """

    def __init__(
        self,
        data_dir,
        n_robots=8,
        seed=None,
        profiles=None,
        clock=time.time,
        id_factory=None,
        job_timeout=600.0,
        connect_timeout=60.0,
    ):
        self.data_dir = data_dir
        self.logs_dir = os.path.join(data_dir, "logs")
        os.makedirs(self.logs_dir, exist_ok=True)
        self.journal_path = os.path.join(data_dir, "journal.jsonl")
        self.robots = [f"robot{i:02d}" for i in range(n_robots)]
        self.profiles = profiles or {}
        self.clock = clock
        self.id_factory = id_factory or (lambda: uuid.uuid4().hex)
        self.job_timeout = job_timeout
        self.connect_timeout = connect_timeout
        self.rng = np.random.default_rng(seed)

        self._lock = threading.RLock()
        self._work = threading.Condition(self._lock)
        self._jobs = {}
        self._queue = []  # job ids, FIFO
        self._idle = set(self.robots)
        self._running_on = {}  # robot_id -> job_id, for invariant checks
        self._stop = False
        self._dispatcher = None
        self._workers = []

        self._recover()

    # -- journal --

    def _journal(self, record):
        entry = {
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
        with open(self.journal_path, "a") as f:
            f.write(json.dumps(entry, sort_keys=True) + "\n")

    def _recover(self):
        if not os.path.exists(self.journal_path):
            return
        with open(self.journal_path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                record = JobRecord(
                    job_id=entry["job_id"],
                    spec=_spec_from_json(entry["spec"]),
                    state=entry["state"],
                    robot_id=entry.get("robot_id"),
                    submitted=entry.get("submitted"),
                    started=entry.get("started"),
                    ended=entry.get("ended"),
                    result_ref=entry.get("result_ref"),
                    failure_reason=entry.get("failure_reason"),
                )
                self._jobs[record.job_id] = record
        # Requeue jobs that never started; fail jobs interrupted mid-run.
        for record in self._jobs.values():
            if record.state == QUEUED:
                self._queue.append(record.job_id)
            elif record.state == RUNNING:
                record.state = FAILED
                record.failure_reason = "interrupted by scheduler restart"
                record.ended = self.clock()
                record.robot_id = None
                self._journal(record)

    # -- public API --

    def submit_job(self, spec):
        validate_spec(spec)
        record = JobRecord(job_id=self.id_factory(), spec=spec, submitted=self.clock())
        with self._work:
            self._jobs[record.job_id] = record
            self._queue.append(record.job_id)
            self._journal(record)
            self._work.notify_all()
        return record.job_id

    def assign_next(self):
        """Assign the oldest queued job to a uniformly random idle robot."""
        with self._lock:
            if not self._queue or not self._idle:
                raise NothingToAssign("no queued job / idle robot pair available")
            job_id = self._queue.pop(0)
            robot_id = sorted(self._idle)[self.rng.integers(len(self._idle))]
            self._idle.discard(robot_id)
            record = self._jobs[job_id]
            record.state = RUNNING
            record.robot_id = robot_id
            record.started = self.clock()
            assert robot_id not in self._running_on
            self._running_on[robot_id] = job_id
            self._journal(record)
            return record, robot_id

    def run_job(self, record):
        """Execute one assigned job to a terminal state; never raises."""
        spec = record.spec
        try:
            params = self.profiles.get(spec.phase, EvaluationParams.phase_profile(spec.phase))
            backend = episode_mod.build_backend(
                phase=spec.phase,
                level=spec.level,
                seed=spec.seed,
                goal=spec.goal_override,
                params=params,
                job_id=record.job_id,
                submitted=record.submitted,
                started=record.started,
            )
            if isinstance(spec.controller, BuiltIn):
                controller = controllers_mod.get_controller(spec.controller.name)
                log = episode_mod.run_episode_builtin(
                    controller, backend, spec.controller.params, timeout=self.job_timeout
                )
            else:
                log = episode_mod.run_episode_external(
                    spec.controller.command,
                    backend,
                    connect_timeout=self.connect_timeout,
                    timeout=self.job_timeout,
                )
            path = os.path.join(self.logs_dir, record.job_id + FILE_EXTENSION)
            write_log_file(log, path)
            with self._lock:
                record.state = FINISHED
                record.result_ref = path
        except TimeoutError as exc:
            with self._lock:
                record.state = FAILED
                record.failure_reason = f"Timeout: {exc}"
        except Exception as exc:
            with self._lock:
                record.state = FAILED
                record.failure_reason = f"{type(exc).__name__}: {exc}"
        with self._work:
            record.ended = self.clock()
            if record.robot_id in self._running_on:
                del self._running_on[record.robot_id]
                self._idle.add(record.robot_id)
            self._journal(record)
            self._work.notify_all()
        return record

    def job_status(self, job_id):
        with self._lock:
            if job_id not in self._jobs:
                raise UnknownJob(f"no job {job_id!r}")
            return replace_record(self._jobs[job_id])

    def fetch_result(self, job_id):
        record = self.job_status(job_id)
        if record.state != FINISHED:
            raise NotFinished(f"job {job_id} is {record.state}")
        with open(record.result_ref, "rb") as f:
            return f.read()

    def list_jobs(self):
        with self._lock:
            return [replace_record(r) for r in self._jobs.values()]

    # -- execution drivers --

    def run_pending(self):
        """Synchronously drain the queue on this thread (one robot at a time)."""
        done = []
        while True:
            try:
                record, _ = self.assign_next()
            except NothingToAssign:
                break
            done.append(self.run_job(record))
        return done

    def start(self):
        """Dispatcher thread + one worker thread per assignment."""
        self._stop = False
        self._dispatcher = threading.Thread(target=self._dispatch_loop, daemon=True)
        self._dispatcher.start()

    def _dispatch_loop(self):
        while True:
            with self._work:
                while not self._stop and (not self._queue or not self._idle):
                    self._work.wait(timeout=0.5)
                if self._stop:
                    return
                record, robot_id = self.assign_next()
            worker = threading.Thread(target=self.run_job, args=(record,), daemon=True)
            self._workers.append(worker)
            worker.start()

    def stop(self):
        with self._work:
            self._stop = True
            self._work.notify_all()
        if self._dispatcher is not None:
            self._dispatcher.join()
        for worker in self._workers:
            worker.join()
        self._workers = []

    def wait_all(self, timeout=None):
        """Block until every submitted job is terminal."""
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._work:
            while any(r.state in (QUEUED, RUNNING) for r in self._jobs.values()):
                wait = None if deadline is None else max(0.0, deadline - time.monotonic())
                if deadline is not None and wait == 0.0:
                    return False
                self._work.wait(timeout=wait if wait is not None else 0.5)
        return True


def replace_record(record):
    return JobRecord(
        job_id=record.job_id,
        spec=record.spec,
        state=record.state,
        robot_id=record.robot_id,
        submitted=record.submitted,
        started=record.started,
        ended=record.ended,
        result_ref=record.result_ref,
        failure_reason=record.failure_reason,
    )
