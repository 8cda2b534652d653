"""Episode recording and the canonical .tfel binary log codec.

Layout (all little-endian):
  magic "TFEL" | version u32 | header u32 length + canonical JSON |
  step records | camera records | CRC-32 trailer u32.

Step record: t u64, desired kind u8 + 9 f64, applied 9 f64, position 9 f64,
velocity 9 f64, torque 9 f64, tip_force 3 f64.  Camera record: t u64,
pose 7 f64 (position + quaternion), confidence f64, 3 x (u32 length + bytes).
Round trips are exact: parse(serialize(log)) == log and
serialize(parse(b)) == b.
"""

import io
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .core import POSITION, TORQUE, Goal, Pose
from .errors import (
    BadMagic,
    BadVersion,
    CrcMismatch,
    OutOfOrder,
    Truncated,
)

MAGIC = b"TFEL"
VERSION = 1
FILE_EXTENSION = ".tfel"

KIND_CODES = {TORQUE: 0, POSITION: 1}
KIND_NAMES = {code: kind for kind, code in KIND_CODES.items()}

STEP_DTYPE = np.dtype(
    [
        ("t", "<u8"),
        ("desired_kind", "u1"),
        ("desired", "<f8", (9,)),
        ("applied", "<f8", (9,)),
        ("position", "<f8", (9,)),
        ("velocity", "<f8", (9,)),
        ("torque", "<f8", (9,)),
        ("tip_force", "<f8", (3,)),
    ]
)

_CAMERA_FIXED = struct.Struct("<Q8d")


def default_camera_calibration():
    """Placeholder calibration for the three (non-rendering) cameras."""
    cams = []
    for i in range(3):
        cams.append(
            {
                "intrinsics": [450.0, 0.0, 135.0, 0.0, 450.0, 135.0, 0.0, 0.0, 1.0],
                "distortion": [0.0, 0.0, 0.0, 0.0, 0.0],
                "extrinsics": list(np.eye(4).ravel()),
            }
        )
    return cams


@dataclass
class CameraRecord:
    timestep: int
    position: tuple  # 3 floats
    orientation: tuple  # 4 floats
    confidence: float
    images: tuple = (b"", b"", b"")


@dataclass
class EpisodeLog:
    """A complete recorded episode; built incrementally, then finalized."""

    phase: int
    level: int
    goal: Goal
    seed: int
    control_rate: int
    episode_steps: int
    robot_config_text: str
    object_config_text: str
    camera_calibration: list = field(default_factory=default_camera_calibration)
    job_id: str = ""
    submitted: float = 0.0
    started: float = 0.0

    def __post_init__(self):
        self.steps = np.zeros(self.episode_steps, dtype=STEP_DTYPE)
        self.camera_records = []
        self.n_steps = 0
        self.finalized = False

    @property
    def camera_period(self):
        return self.control_rate // 10

    # -- recording --

    def record_step_raw(self, t, kind_code, desired, applied, position, velocity, tip_force):
        if t != self.n_steps:
            raise OutOfOrder(f"expected step {self.n_steps}, got {t}")
        row = self.steps[t]
        row["t"] = t
        row["desired_kind"] = kind_code
        row["desired"] = desired
        row["applied"] = applied
        row["position"] = position
        row["velocity"] = velocity
        row["torque"] = applied
        row["tip_force"] = tip_force
        self.n_steps = t + 1

    def record_step(self, t, desired, applied, obs):
        """Record one control step: the desired action, the safety-clamped
        applied torque and the resulting robot observation."""
        applied_values = getattr(applied, "values", applied)
        self.record_step_raw(
            t,
            KIND_CODES[desired.kind],
            desired.values,
            applied_values,
            obs.position,
            obs.velocity,
            obs.tip_force,
        )

    def record_camera(self, obs):
        expected = len(self.camera_records) * self.camera_period
        if obs.timestep != expected:
            raise OutOfOrder(f"expected camera step {expected}, got {obs.timestep}")
        self.camera_records.append(
            CameraRecord(
                timestep=obs.timestep,
                position=tuple(float(v) for v in obs.object_pose.position),
                orientation=tuple(float(v) for v in obs.object_pose.orientation),
                confidence=float(obs.pose_confidence),
                images=tuple(img.data for img in obs.images),
            )
        )

    def finalize(self):
        if self.n_steps != self.episode_steps:
            raise OutOfOrder(
                f"log has {self.n_steps} steps, header declares {self.episode_steps}"
            )
        expected_cameras = self.episode_steps // self.camera_period
        if len(self.camera_records) != expected_cameras:
            raise OutOfOrder(
                f"log has {len(self.camera_records)} camera records, expected {expected_cameras}"
            )
        self.finalized = True
        return self

    # -- accessors --

    def object_pose_at(self, t):
        """Last camera pose at or before control step t (zero-order hold)."""
        record = self.camera_records[t // self.camera_period]
        return Pose(np.array(record.position), np.array(record.orientation))

    def header_dict(self):
        return {
            "phase": self.phase,
            "level": self.level,
            "goal": {
                "level": self.goal.level,
                "position": [float(v) for v in self.goal.pose.position],
                "orientation": [float(v) for v in self.goal.pose.orientation],
            },
            "seed": self.seed,
            "control_rate": self.control_rate,
            "episode_steps": self.episode_steps,
            "robot_config": self.robot_config_text,
            "object_config": self.object_config_text,
            "camera_calibration": self.camera_calibration,
            "metadata": {
                "job_id": self.job_id,
                "submitted": self.submitted,
                "started": self.started,
            },
        }


def _canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


class _CrcWriter:
    """Stream wrapper accumulating the CRC-32 of everything written."""

    def __init__(self, stream):
        self.stream = stream
        self.crc = 0

    def write(self, data):
        self.crc = zlib.crc32(data, self.crc)
        self.stream.write(data)


def write_log_stream(log, stream, chunk_steps=10000):
    """Single-pass streaming write; buffers at most chunk_steps records."""
    out = _CrcWriter(stream)
    out.write(MAGIC)
    out.write(struct.pack("<I", VERSION))
    header = _canonical_json(log.header_dict())
    out.write(struct.pack("<I", len(header)))
    out.write(header)
    for start in range(0, log.episode_steps, chunk_steps):
        out.write(log.steps[start : start + chunk_steps].tobytes())
    for rec in log.camera_records:
        out.write(_CAMERA_FIXED.pack(rec.timestep, *rec.position, *rec.orientation, rec.confidence))
        for blob in rec.images:
            out.write(struct.pack("<I", len(blob)))
            out.write(blob)
    stream.write(struct.pack("<I", out.crc))


def write_log(log):
    buf = io.BytesIO()
    write_log_stream(log, buf)
    return buf.getvalue()


def write_log_file(log, path):
    with open(path, "wb") as f:
        write_log_stream(log, f)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, n):
        if self.offset + n > len(self.data):
            raise Truncated(f"log ends at byte {len(self.data)}, needed {self.offset + n}")
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]


def read_log(data):
    if len(data) < 4:
        raise Truncated("log shorter than the magic")
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise BadMagic("not a TFEL log")
    version = reader.u32()
    if version != VERSION:
        raise BadVersion(f"unsupported log version {version}")
    header = json.loads(reader.take(reader.u32()))

    goal = Goal(
        level=header["goal"]["level"],
        pose=Pose(
            np.array(header["goal"]["position"]),
            np.array(header["goal"]["orientation"]),
        ),
    )
    log = EpisodeLog(
        phase=header["phase"],
        level=header["level"],
        goal=goal,
        seed=header["seed"],
        control_rate=header["control_rate"],
        episode_steps=header["episode_steps"],
        robot_config_text=header["robot_config"],
        object_config_text=header["object_config"],
        camera_calibration=header["camera_calibration"],
        job_id=header["metadata"]["job_id"],
        submitted=header["metadata"]["submitted"],
        started=header["metadata"]["started"],
    )

    step_bytes = reader.take(log.episode_steps * STEP_DTYPE.itemsize)
    log.steps = np.frombuffer(step_bytes, dtype=STEP_DTYPE).copy()
    log.n_steps = log.episode_steps

    for _ in range(log.episode_steps // log.camera_period):
        fixed = _CAMERA_FIXED.unpack(reader.take(_CAMERA_FIXED.size))
        images = tuple(bytes(reader.take(reader.u32())) for _ in range(3))
        log.camera_records.append(
            CameraRecord(
                timestep=fixed[0],
                position=fixed[1:4],
                orientation=fixed[4:8],
                confidence=fixed[8],
                images=images,
            )
        )

    declared_crc = struct.unpack("<I", reader.take(4))[0]
    actual_crc = zlib.crc32(data[: reader.offset - 4])
    if declared_crc != actual_crc:
        raise CrcMismatch(f"CRC 0x{actual_crc:08x} does not match declared 0x{declared_crc:08x}")
    if reader.offset != len(data):
        raise Truncated(f"{len(data) - reader.offset} trailing bytes after the trailer")
    log.finalized = True
    return log


def read_log_file(path):
    with open(path, "rb") as f:
        return read_log(f.read())


# -- metadata export --

METRIC_FIELDS = (
    "cumulative_reward",
    "baseline_reward",
    "init_dist_to_goal",
    "closest_dist_to_goal",
    "max_height",
    "max_displacement",
)


def export_metadata(log, metrics):
    """One canonical JSON metadata record for the dataset index.

    Contains only an opaque episode id; no user identity.
    """
    record = {
        "episode_id": log.job_id,
        "phase": log.phase,
        "level": log.level,
        "goal": log.header_dict()["goal"],
        "seed": log.seed,
        "timestamps": {"submitted": log.submitted, "started": log.started},
        "control_rate": log.control_rate,
        "episode_steps": log.episode_steps,
        "metrics": {name: float(getattr(metrics, name)) for name in METRIC_FIELDS},
    }
    return _canonical_json(record).decode()


# -- chunked directory export (flat binary chunks + manifest) --

CHUNK_STEPS = 10000


def export_chunked(log, directory):
    """Directory export: one subdirectory per field, flat binary chunks of
    10000 steps each, plus a JSON manifest describing dtypes and shapes."""
    import os

    os.makedirs(directory, exist_ok=True)
    manifest = {
        "format": "robobench-chunked",
        "version": 1,
        "chunk_steps": CHUNK_STEPS,
        "episode_steps": log.episode_steps,
        "camera_steps": len(log.camera_records),
        "header": log.header_dict(),
        "fields": {},
    }
    for name in STEP_DTYPE.names:
        column = np.ascontiguousarray(log.steps[name])
        subdir = os.path.join(directory, name)
        os.makedirs(subdir, exist_ok=True)
        for chunk_idx, start in enumerate(range(0, log.episode_steps, CHUNK_STEPS)):
            chunk = column[start : start + CHUNK_STEPS]
            with open(os.path.join(subdir, f"{chunk_idx:06d}.bin"), "wb") as f:
                f.write(chunk.tobytes())
        manifest["fields"][name] = {
            "dtype": column.dtype.str,
            "shape": list(column.shape[1:]),
        }
    camera_pose = np.array(
        [rec.position + rec.orientation for rec in log.camera_records], dtype="<f8"
    ).reshape(len(log.camera_records), 7)
    camera_t = np.array([rec.timestep for rec in log.camera_records], dtype="<u8")
    confidence = np.array([rec.confidence for rec in log.camera_records], dtype="<f8")
    for name, column in (
        ("camera_t", camera_t),
        ("camera_object_pose", camera_pose),
        ("camera_confidence", confidence),
    ):
        subdir = os.path.join(directory, name)
        os.makedirs(subdir, exist_ok=True)
        with open(os.path.join(subdir, "000000.bin"), "wb") as f:
            f.write(np.ascontiguousarray(column).tobytes())
        manifest["fields"][name] = {"dtype": column.dtype.str, "shape": list(column.shape[1:])}
    with open(os.path.join(directory, "manifest.json"), "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
