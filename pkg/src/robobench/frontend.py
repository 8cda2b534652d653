"""Time-indexed action-queue interface between controllers and a robot.

A RobotBackend owns one plant and steps it to the episode budget.  Clients
append desired actions (never blocks, returns the execution timestep) and
fetch observations (blocks until the step has completed).  Steps whose
action is missing repeat the last consumed action up to max_repeat times,
then fall back to zero torque.
"""

import threading
import time
from dataclasses import dataclass

import numpy as np

from . import plant as plant_mod
from .core import (
    POSITION,
    TORQUE,
    Action,
    CameraImage,
    CameraObservation,
    Pose,
    RobotObservation,
    validate_action,
)
from .core import ObjectConfig
from .errors import EpisodeFinished, TooOld
from .recorder import KIND_CODES, KIND_NAMES, EpisodeLog

DEFAULT_CAPACITY = 5000
DEFAULT_MAX_REPEAT = 1000


@dataclass
class EpisodeInfo:
    phase: int
    level: int
    goal: object
    episode_steps: int
    control_rate: int


class RobotBackend:
    """Steps the plant, consuming the action queue and recording everything.

    One stepping context per backend; append/get are safe from any number
    of client threads.  In desk mode steps run as fast as possible; set
    real_time=True to pace them to the control period.
    """

    def __init__(
        self,
        cfg,
        obj,
        params,
        goal,
        seed=None,
        log=None,
        capacity=DEFAULT_CAPACITY,
        max_repeat=DEFAULT_MAX_REPEAT,
        obs_noise_sigma=0.0,
        real_time=False,
    ):
        self.cfg = cfg
        self.obj = obj
        self.params = params
        self.goal = goal
        self.seed = seed
        self.capacity = capacity
        self.max_repeat = max_repeat
        self.obs_noise_sigma = obs_noise_sigma
        self.real_time = real_time

        self.state = plant_mod.make_initial_state(cfg, obj, seed=seed)
        self.log = log if log is not None else _blank_log(params, goal, seed)

        self._lock = threading.Lock()
        self._step_done = threading.Condition(self._lock)
        self._queue = {}
        self._next_free_slot = 0
        self._started = threading.Event()
        self._last_consumed = None
        self._repeat_count = 0
        self._completed = -1  # last finished step
        self._finished = False
        self._thread = None
        self._lockstep = False

    # -- frontend operations --

    def episode_info(self):
        return EpisodeInfo(
            phase=self.log.phase,
            level=self.log.level,
            goal=self.goal,
            episode_steps=self.params.episode_steps,
            control_rate=self.params.control_rate,
        )

    def append_desired_action(self, action):
        """Queue the action; returns the timestep at which it will execute.

        The first append starts the backend at step 0.  Never blocks.
        """
        action = validate_action(action, self.cfg)
        with self._lock:
            if self._finished or self._next_free_slot >= self.params.episode_steps:
                raise EpisodeFinished("the episode step budget is exhausted")
            t = max(self._completed + 1, self._next_free_slot)
            self._queue[t] = action
            self._next_free_slot = t + 1
        self._started.set()
        if self._lockstep:
            while self._completed < t and not self._finished:
                self.step_once()
        return t

    def enable_lockstep(self):
        """In-process deterministic mode: each append immediately executes
        the queued step on the caller's thread, so no slot is ever skipped
        by scheduling jitter.  Only valid without a stepping thread."""
        assert self._thread is None
        self._lockstep = True

    def get_robot_observation(self, t):
        self._wait_for_step(t)
        with self._lock:
            self._check_window(t)
            row = self.log.steps[t]
        return RobotObservation(
            timestep=t,
            position=row["position"].copy(),
            velocity=row["velocity"].copy(),
            torque=row["torque"].copy(),
            tip_force=row["tip_force"].copy(),
        )

    def get_desired_action(self, t):
        self._wait_for_step(t)
        with self._lock:
            self._check_window(t)
            row = self.log.steps[t]
        return Action(KIND_NAMES[int(row["desired_kind"])], row["desired"].copy())

    def get_applied_action(self, t):
        self._wait_for_step(t)
        with self._lock:
            self._check_window(t)
        return Action(TORQUE, self.log.steps[t]["applied"].copy())

    def get_camera_observation(self, t):
        """Camera observation of the latest camera step <= t; blocks like
        get_robot_observation."""
        self._wait_for_step(t)
        record = self.log.camera_records[t // self.params.camera_period]
        return CameraObservation(
            timestep=record.timestep,
            object_pose=Pose(np.array(record.position), np.array(record.orientation)),
            pose_confidence=record.confidence,
            images=tuple(CameraImage(data=blob) for blob in record.images),
        )

    def _wait_for_step(self, t):
        if t < 0:
            raise ValueError(f"timestep must be >= 0, got {t}")
        if t >= self.params.episode_steps:
            raise EpisodeFinished(f"step {t} exceeds the episode budget")
        with self._step_done:
            while self._completed < t and not self._finished:
                self._step_done.wait()
            if self._completed < t:
                raise EpisodeFinished("backend stopped before reaching the requested step")

    def _check_window(self, t):
        if t < self._completed - self.capacity + 1:
            raise TooOld(
                f"step {t} is older than the {self.capacity}-step history window"
            )

    # -- backend stepping --

    def step_once(self):
        """Execute exactly one backend step.  Returns the applied torque."""
        with self._lock:
            if self._finished:
                raise EpisodeFinished("episode already finished")
            t = self._completed + 1
            desired = self._queue.pop(t, None)
            if desired is not None:
                self._last_consumed = desired
                self._repeat_count = 0
            elif self._last_consumed is not None and self._repeat_count < self.max_repeat:
                desired = self._last_consumed
                self._repeat_count += 1
            else:
                desired = Action.zero_torque()
                if self._last_consumed is not None:
                    self._repeat_count += 1
            if self._next_free_slot <= t:
                self._next_free_slot = t + 1

        if desired.kind == POSITION:
            torque = plant_mod.pd_controller(desired.values, self.state, self.cfg)
        else:
            torque = desired.values
        applied = plant_mod.safety_clamp(torque, self.state, self.cfg)
        self.state = plant_mod.step(self.state, applied, self.cfg, self.obj, self.params.dt)

        st = self.state
        self.log.record_step_raw(
            t, KIND_CODES[desired.kind], desired.values, applied,
            st.joint_pos, st.joint_vel, st.tip_force,
        )
        if t % self.params.camera_period == 0:
            _, camera_obs = plant_mod.observe(
                st, applied, self.params.camera_period, self.obs_noise_sigma
            )
            self.log.record_camera(camera_obs)

        with self._step_done:
            self._completed = t
            if t + 1 >= self.params.episode_steps:
                self._finished = True
                self.log.finalize()
            self._step_done.notify_all()
        return applied

    @property
    def finished(self):
        return self._finished

    @property
    def current_step(self):
        return self._completed

    def run(self, wait_for_start=True):
        """Step to the end of the episode (current thread)."""
        if wait_for_start:
            self._started.wait()
        period = self.params.dt if self.real_time else 0.0
        next_deadline = time.monotonic()
        while not self._finished:
            self.step_once()
            if period:
                next_deadline += period
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)

    def start(self):
        """Run the stepping loop in a daemon thread; it begins stepping at
        the first append (or immediately after start_now())."""
        self._thread = threading.Thread(target=self.run, daemon=True)
        self._thread.start()
        return self._thread

    def start_now(self):
        """Begin stepping even if no action was ever appended (missing-action
        policy then yields zero torque throughout)."""
        self._started.set()

    def join(self, timeout=None):
        if self._thread is not None:
            self._thread.join(timeout)
        return self._finished

    def run_to_completion(self):
        """Ensure the episode reaches its budget (pads with the
        missing-action policy); used after a controller exits or crashes."""
        self.start_now()
        if self._thread is None:
            self.run(wait_for_start=False)
        else:
            self._thread.join()


def _blank_log(params, goal, seed):
    cfg = plant_mod.RobotConfig()
    return EpisodeLog(
        phase=2,
        level=goal.level if goal is not None else 1,
        goal=goal,
        seed=seed if seed is not None else 0,
        control_rate=params.control_rate,
        episode_steps=params.episode_steps,
        robot_config_text=plant_mod.config_to_text(cfg),
        object_config_text=plant_mod.object_config_to_text(ObjectConfig.cube()),
    )
