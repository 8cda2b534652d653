"""Competition-style evaluation: shared goals per level, averaged rewards,
weighted totals, ranked leaderboard."""

import os
import tempfile

import numpy as np

from . import evaluation, plant
from .core import EvaluationParams, ObjectConfig, Pose
from .evaluation import RewardSpec, ScoreBreakdown
from .recorder import read_log_file
from .scheduler import FINISHED, JobSpec, Scheduler


def baseline_reward_for(spec, goal, seed):
    """Cumulative reward of an episode whose object never moves (the scoring
    convention substituted for failed jobs)."""
    cfg = plant.RobotConfig()
    state = plant.make_initial_state(cfg, spec.object, seed=seed)
    pose = Pose(state.object_position, state.object_orientation)
    return spec.params.episode_steps * evaluation.step_reward(spec, goal, pose)


def run_evaluation(teams, goals_per_level, seed, phase=2, scheduler=None, data_dir=None):
    """Score every team on an identical goal set and rank them.

    teams: list of (user, controller) pairs, controller being a
    scheduler.BuiltIn or scheduler.External.  Returns the ranked list of
    ScoreBreakdown (ties broken by submission order).
    """
    own_scheduler = scheduler is None
    if own_scheduler:
        data_dir = data_dir or tempfile.mkdtemp(prefix="robobench-eval-")
        scheduler = Scheduler(data_dir, n_robots=1, seed=seed)
    params = scheduler.profiles.get(phase, EvaluationParams.phase_profile(phase))
    obj = ObjectConfig.for_phase(phase)

    goal_rng = np.random.default_rng(seed)
    goals = {
        level: [
            evaluation.sample_goal(level, phase, goal_rng, params, obj)
            for _ in range(goals_per_level)
        ]
        for level in (1, 2, 3, 4)
    }

    jobs = {}  # (team index, level, goal index) -> job_id
    for team_idx, (user, controller) in enumerate(teams):
        for level in (1, 2, 3, 4):
            for goal_idx, goal in enumerate(goals[level]):
                spec = JobSpec(
                    user=user,
                    phase=phase,
                    level=level,
                    controller=controller,
                    seed=1000 * level + goal_idx,  # shared across teams
                    goal_override=goal,
                )
                jobs[(team_idx, level, goal_idx)] = scheduler.submit_job(spec)
    scheduler.run_pending()

    breakdowns = []
    for team_idx, (user, _) in enumerate(teams):
        level_rewards = []
        for level in (1, 2, 3, 4):
            reward_spec = RewardSpec(phase=phase, level=level, params=params, object=obj)
            rewards = []
            for goal_idx, goal in enumerate(goals[level]):
                record = scheduler.job_status(jobs[(team_idx, level, goal_idx)])
                if record.state == FINISHED:
                    log = read_log_file(record.result_ref)
                    rewards.append(evaluation.cumulative_reward_from_log(reward_spec, log))
                else:
                    rewards.append(
                        baseline_reward_for(reward_spec, goal, 1000 * level + goal_idx)
                    )
            level_rewards.append(sum(rewards) / len(rewards))
        breakdowns.append(ScoreBreakdown.from_levels(user, level_rewards))

    # Stable sort keeps submission order on exact ties.
    breakdowns.sort(key=lambda b: -b.total)
    return breakdowns
