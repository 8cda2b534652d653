"""Post-hoc dataset tooling: per-episode metrics, metadata index, filtering.

Metrics use the object poses recorded at camera steps, held constant
between camera frames (the pose resolution the log actually stores).
"""

import json
import os
import shutil
from dataclasses import dataclass

import numpy as np

from . import evaluation
from .errors import BadPredicate, EmptyLog, RoboBenchError
from .recorder import (
    FILE_EXTENSION,
    METRIC_FIELDS,
    export_chunked,
    export_metadata,
    read_log_file,
)


@dataclass(frozen=True)
class EpisodeMetrics:
    cumulative_reward: float
    baseline_reward: float
    init_dist_to_goal: float  # m, plain 3-D Euclidean
    closest_dist_to_goal: float
    max_height: float
    max_displacement: float


def compute_metrics(log, spec=None):
    """The six filter metrics of one finalized episode."""
    if not log.camera_records:
        raise EmptyLog("log has no camera records")
    if spec is None:
        spec = evaluation.RewardSpec(
            phase=log.phase,
            level=log.level,
            params=evaluation.EvaluationParams(
                control_rate=log.control_rate, episode_steps=log.episode_steps
            ),
        )
    goal_pos = np.asarray(log.goal.pose.position)
    positions = np.array([rec.position for rec in log.camera_records])
    dists = np.linalg.norm(positions - goal_pos, axis=1)

    cumulative = evaluation.cumulative_reward_from_log(spec, log)
    baseline = evaluation.baseline_reward_from_log(spec, log)

    return EpisodeMetrics(
        cumulative_reward=cumulative,
        baseline_reward=baseline,
        init_dist_to_goal=float(dists[0]),
        closest_dist_to_goal=float(dists.min()),
        max_height=float(positions[:, 2].max()),
        max_displacement=float(np.linalg.norm(positions - positions[0], axis=1).max()),
    )


# -- index --


def build_index(log_dir, index_path):
    """Write one metadata line per .tfel episode, sorted by episode id.

    Unparseable files are skipped and counted.  Returns (indexed, skipped).
    """
    records = []
    skipped = []
    for name in sorted(os.listdir(log_dir)):
        if not name.endswith(FILE_EXTENSION):
            continue
        path = os.path.join(log_dir, name)
        try:
            log = read_log_file(path)
            metrics = compute_metrics(log)
            records.append((log.job_id, export_metadata(log, metrics)))
        except (RoboBenchError, OSError, ValueError, KeyError) as exc:
            skipped.append((name, f"{type(exc).__name__}: {exc}"))
    records.sort(key=lambda item: item[0])
    with open(index_path, "w") as f:
        for _, line in records:
            f.write(line + "\n")
    return len(records), skipped


def read_index(index_path):
    with open(index_path) as f:
        return [json.loads(line) for line in f if line.strip()]


# -- predicate mini-language: conjunction of "field op literal" terms --

_OPERATORS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}

_FIELDS = ("phase", "level") + METRIC_FIELDS


def parse_predicate(expression):
    """Parse a space-separated conjunction like "level==4 max_height>=0.08".

    Returns a callable over metadata records.  Raises BadPredicate with the
    character position of the first unparseable term.
    """
    terms = []
    position = 0
    for token in expression.split():
        position = expression.index(token, position)
        for op in ("<=", ">=", "==", "<", ">"):
            if op in token:
                name, _, literal = token.partition(op)
                break
        else:
            raise BadPredicate(f"no comparison operator in {token!r}", position)
        if name not in _FIELDS:
            raise BadPredicate(f"unknown field {name!r}", position)
        try:
            value = float(literal)
        except ValueError:
            raise BadPredicate(f"bad literal {literal!r}", position + len(name) + len(op))
        terms.append((name, _OPERATORS[op], value))
        position += len(token)

    def predicate(record):
        for name, op, value in terms:
            actual = record[name] if name in ("phase", "level") else record["metrics"][name]
            if not op(float(actual), value):
                return False
        return True

    return predicate


def filter_episodes(index_path, expression):
    """Episode ids matching the predicate, in index order."""
    predicate = parse_predicate(expression)
    return [rec["episode_id"] for rec in read_index(index_path) if predicate(rec)]


def export_selection(index_path, expression, log_dir, out_dir):
    """Copy matching logs into out_dir along with their chunked exports."""
    os.makedirs(out_dir, exist_ok=True)
    selected = filter_episodes(index_path, expression)
    for episode_id in selected:
        src = os.path.join(log_dir, episode_id + FILE_EXTENSION)
        shutil.copy(src, os.path.join(out_dir, episode_id + FILE_EXTENSION))
        export_chunked(read_log_file(src), os.path.join(out_dir, episode_id))
    return selected
