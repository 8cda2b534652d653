"""Glue that runs one complete episode: plant + backend + controller.

Deterministic: identical (phase, level, goal, seed, configs, controller)
produce bitwise-identical logs when the same job metadata is supplied.
"""

import subprocess
import threading

import numpy as np

from . import evaluation, plant
from .core import EvaluationParams, ObjectConfig
from .errors import RoboBenchError
from .frontend import RobotBackend
from .recorder import EpisodeLog, default_camera_calibration


def build_backend(
    phase,
    level,
    seed,
    goal=None,
    params=None,
    cfg=None,
    obj=None,
    job_id="",
    submitted=0.0,
    started=0.0,
    obs_noise_sigma=0.0,
    capacity=5000,
    max_repeat=1000,
):
    """Construct a fully wired backend (plant + recorder) for one episode."""
    params = params if params is not None else EvaluationParams.phase_profile(phase)
    cfg = cfg if cfg is not None else plant.RobotConfig()
    obj = obj if obj is not None else ObjectConfig.for_phase(phase)
    if goal is None:
        rng = np.random.default_rng(None if seed is None else seed + 1)
        goal = evaluation.sample_goal(level, phase, rng, params, obj)
    log = EpisodeLog(
        phase=phase,
        level=level,
        goal=goal,
        seed=seed if seed is not None else 0,
        control_rate=params.control_rate,
        episode_steps=params.episode_steps,
        robot_config_text=plant.config_to_text(cfg),
        object_config_text=plant.object_config_to_text(obj),
        camera_calibration=default_camera_calibration(),
        job_id=job_id,
        submitted=submitted,
        started=started,
    )
    return RobotBackend(
        cfg,
        obj,
        params,
        goal,
        seed=seed,
        log=log,
        capacity=capacity,
        max_repeat=max_repeat,
        obs_noise_sigma=obs_noise_sigma,
    )


def run_episode_builtin(controller, backend, controller_params=None, timeout=None):
    """Run a built-in controller against the backend; always completes the
    episode (controller crashes leave the missing-action policy in charge).

    Lockstep mode: the plant advances exactly one step per appended action,
    so the result is independent of thread scheduling."""
    backend.enable_lockstep()
    error = []

    def drive():
        try:
            controller(backend, controller_params)
        except RoboBenchError:
            pass
        except Exception as exc:  # controller bug: pad episode, keep reason
            error.append(exc)

    worker = threading.Thread(target=drive, daemon=True)
    worker.start()
    worker.join(timeout)
    if worker.is_alive():
        raise TimeoutError("controller did not finish within the timeout")
    backend.run_to_completion()
    return backend.log.finalize() if not backend.log.finalized else backend.log


def run_episode_external(command, backend, connect_timeout=60.0, timeout=600.0):
    """Spawn an external controller speaking the wire protocol on stdio."""
    from .wire import serve_backend_stdio

    proc = subprocess.Popen(
        command,
        shell=isinstance(command, str),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
    )
    try:
        serve_backend_stdio(
            backend, proc.stdout, proc.stdin, connect_timeout=connect_timeout, timeout=timeout
        )
    finally:
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
    backend.run_to_completion()
    return backend.log.finalize() if not backend.log.finalized else backend.log
