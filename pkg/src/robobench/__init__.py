"""robobench: a desk-scale software reproduction of a remote tri-finger
manipulation benchmark cluster.

Simulated 9-DOF tri-finger robots behind a cluster-style job scheduler,
with the benchmark's action-queue control protocol, reward and scoring
mathematics, binary episode logging, and dataset tooling.
"""

from . import (
    cli,
    controllers,
    core,
    dataset,
    episode,
    errors,
    evaluation,
    frontend,
    harness,
    plant,
    recorder,
    rotation,
    scheduler,
    service,
    wire,
)
from .core import (
    Action,
    CameraImage,
    CameraObservation,
    EvaluationParams,
    Goal,
    ObjectConfig,
    Pose,
    RobotObservation,
)
from .episode import build_backend, run_episode_builtin, run_episode_external
from .errors import RoboBenchError
from .evaluation import RewardSpec, ScoreBreakdown, aggregate_score, sample_goal, step_reward
from .frontend import RobotBackend
from .harness import run_evaluation
from .plant import RobotConfig
from .recorder import EpisodeLog, read_log_file, write_log_file
from .scheduler import BuiltIn, External, JobSpec, Scheduler

__version__ = "1.0.0"

__all__ = [
    "Action",
    "BuiltIn",
    "CameraImage",
    "CameraObservation",
    "EpisodeLog",
    "EvaluationParams",
    "External",
    "Goal",
    "JobSpec",
    "ObjectConfig",
    "Pose",
    "RewardSpec",
    "RoboBenchError",
    "RobotBackend",
    "RobotConfig",
    "RobotObservation",
    "ScoreBreakdown",
    "Scheduler",
    "aggregate_score",
    "build_backend",
    "read_log_file",
    "run_episode_builtin",
    "run_episode_external",
    "run_evaluation",
    "sample_goal",
    "step_reward",
    "write_log_file",
]
