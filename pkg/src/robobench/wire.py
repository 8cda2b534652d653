"""Length-prefixed client wire protocol for out-of-process controllers.

Frame: u32 little-endian length, then 1 tag byte + payload (length covers
tag + payload).  One request yields exactly one response; the server sends
an EpisodeInfo frame on connect.
"""

import queue
import socket
import struct
import threading

import numpy as np

from .core import Action, CameraImage, CameraObservation, Goal, Pose, RobotObservation, TORQUE, POSITION
from .errors import (
    EpisodeFinished,
    ProtocolError,
    RoboBenchError,
    TooOld,
    WrongDimension,
)

TAG_APPEND_ACTION = 0x01
TAG_ACK_TIMESTEP = 0x02
TAG_GET_ROBOT_OBS = 0x03
TAG_ROBOT_OBS = 0x04
TAG_GET_CAMERA_OBS = 0x05
TAG_CAMERA_OBS = 0x06
TAG_ERROR = 0x07
TAG_EPISODE_INFO = 0x08

ERR_WRONG_DIMENSION = 1
ERR_EPISODE_FINISHED = 2
ERR_TOO_OLD = 3
ERR_PROTOCOL = 4

_ERROR_TYPES = {
    ERR_WRONG_DIMENSION: WrongDimension,
    ERR_EPISODE_FINISHED: EpisodeFinished,
    ERR_TOO_OLD: TooOld,
    ERR_PROTOCOL: ProtocolError,
}

_ERROR_CODES = {
    WrongDimension: ERR_WRONG_DIMENSION,
    EpisodeFinished: ERR_EPISODE_FINISHED,
    TooOld: ERR_TOO_OLD,
}

KIND_CODES = {TORQUE: 0, POSITION: 1}
KIND_NAMES = {0: TORQUE, 1: POSITION}


def encode_frame(tag, payload=b""):
    return struct.pack("<IB", 1 + len(payload), tag) + payload


def read_exact(rfile, n):
    chunks = []
    remaining = n
    while remaining:
        chunk = rfile.read(remaining)
        if not chunk:
            return None if not chunks else b"".join(chunks)
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(rfile):
    """Read one frame; returns (tag, payload) or None at EOF."""
    head = read_exact(rfile, 4)
    if head is None:
        return None
    (length,) = struct.unpack("<I", head)
    if length < 1:
        raise ProtocolError("frame length must cover the tag byte")
    body = read_exact(rfile, length)
    if body is None or len(body) != length:
        raise ProtocolError("connection closed mid-frame")
    return body[0], body[1:]


# -- message payload codecs --


def encode_episode_info(info):
    pose = info.goal.pose
    return struct.pack(
        "<BB7dQI",
        info.phase,
        info.level,
        *pose.position,
        *pose.orientation,
        info.episode_steps,
        info.control_rate,
    )


def decode_episode_info(payload):
    from .frontend import EpisodeInfo

    values = struct.unpack("<BB7dQI", payload)
    goal = Goal(
        level=values[1],
        pose=Pose(np.array(values[2:5]), np.array(values[5:9])),
    )
    return EpisodeInfo(
        phase=values[0],
        level=values[1],
        goal=goal,
        episode_steps=values[9],
        control_rate=values[10],
    )


def encode_append_action(action):
    return struct.pack("<B9d", KIND_CODES[action.kind], *action.values)


def decode_append_action(payload):
    values = struct.unpack("<B9d", payload)
    return Action(KIND_NAMES[values[0]], np.array(values[1:]))


def encode_robot_obs(obs):
    return struct.pack(
        "<Q30d", obs.timestep, *obs.position, *obs.velocity, *obs.torque, *obs.tip_force
    )


def decode_robot_obs(payload):
    v = struct.unpack("<Q30d", payload)
    return RobotObservation(
        timestep=v[0],
        position=np.array(v[1:10]),
        velocity=np.array(v[10:19]),
        torque=np.array(v[19:28]),
        tip_force=np.array(v[28:31]),
    )


def encode_camera_obs(obs):
    out = struct.pack(
        "<Q8d",
        obs.timestep,
        *obs.object_pose.position,
        *obs.object_pose.orientation,
        obs.pose_confidence,
    )
    for image in obs.images:
        out += struct.pack("<I", len(image.data)) + image.data
    return out


def decode_camera_obs(payload):
    fixed = struct.unpack_from("<Q8d", payload)
    offset = struct.calcsize("<Q8d")
    images = []
    for _ in range(3):
        (n,) = struct.unpack_from("<I", payload, offset)
        offset += 4
        images.append(CameraImage(data=payload[offset : offset + n]))
        offset += n
    return CameraObservation(
        timestep=fixed[0],
        object_pose=Pose(np.array(fixed[1:4]), np.array(fixed[4:8])),
        pose_confidence=fixed[8],
        images=tuple(images),
    )


def encode_error(exc):
    code = _ERROR_CODES.get(type(exc), ERR_PROTOCOL)
    text = str(exc).encode()
    return struct.pack("<H", code) + text


def decode_error(payload):
    (code,) = struct.unpack_from("<H", payload)
    text = payload[2:].decode()
    return _ERROR_TYPES.get(code, ProtocolError)(text)


# -- server --


def _handle_request(backend, tag, payload):
    try:
        return _dispatch_request(backend, tag, payload)
    except (struct.error, KeyError) as exc:
        raise ProtocolError(f"malformed payload for tag 0x{tag:02x}: {exc}")


def _dispatch_request(backend, tag, payload):
    if tag == TAG_APPEND_ACTION:
        t = backend.append_desired_action(decode_append_action(payload))
        return encode_frame(TAG_ACK_TIMESTEP, struct.pack("<Q", t))
    if tag == TAG_GET_ROBOT_OBS:
        (t,) = struct.unpack("<Q", payload)
        return encode_frame(TAG_ROBOT_OBS, encode_robot_obs(backend.get_robot_observation(t)))
    if tag == TAG_GET_CAMERA_OBS:
        (t,) = struct.unpack("<Q", payload)
        return encode_frame(TAG_CAMERA_OBS, encode_camera_obs(backend.get_camera_observation(t)))
    raise ProtocolError(f"unexpected request tag 0x{tag:02x}")


def serve_backend_stdio(backend, rfile, wfile, connect_timeout=60.0, timeout=600.0):
    """Serve one controller over a pipe pair until it disconnects.

    Raises TimeoutError if no first request arrives within connect_timeout
    or the connection outlives the overall timeout.
    """
    frames = queue.Queue()

    def reader():
        try:
            while True:
                frame = read_frame(rfile)
                frames.put(frame)
                if frame is None:
                    return
        except (ProtocolError, OSError) as exc:
            frames.put(exc)

    thread = threading.Thread(target=reader, daemon=True)
    thread.start()

    if getattr(backend, "_thread", None) is None:
        backend.start()

    wfile.write(encode_frame(TAG_EPISODE_INFO, encode_episode_info(backend.episode_info())))
    wfile.flush()

    wait = connect_timeout
    while True:
        try:
            frame = frames.get(timeout=wait)
        except queue.Empty:
            raise TimeoutError("controller sent no request in time")
        wait = timeout
        if frame is None:
            return  # controller disconnected
        if isinstance(frame, Exception):
            raise frame
        tag, payload = frame
        try:
            response = _handle_request(backend, tag, payload)
        except RoboBenchError as exc:
            response = encode_frame(TAG_ERROR, encode_error(exc))
        wfile.write(response)
        wfile.flush()


def serve_backend_socket(backend, conn, connect_timeout=60.0, timeout=600.0):
    rfile = conn.makefile("rb")
    wfile = conn.makefile("wb")
    try:
        serve_backend_stdio(backend, rfile, wfile, connect_timeout, timeout)
    finally:
        rfile.close()
        wfile.close()


def serve_backend_tcp(backend, host="127.0.0.1", port=0, announce=None,
                      connect_timeout=60.0, timeout=600.0):
    """Listen for one controller connection, serve the episode, return the log.

    announce, if given, is called with the bound port before accepting, so
    callers (and spawning processes) can learn an ephemeral port.
    """
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as listener:
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((host, port))
        listener.listen(1)
        if announce is not None:
            announce(listener.getsockname()[1])
        listener.settimeout(connect_timeout)
        try:
            conn, _ = listener.accept()
        except socket.timeout:
            raise TimeoutError("no controller connected in time")
        with conn:
            serve_backend_socket(backend, conn, connect_timeout, timeout)
    backend.run_to_completion()
    return backend.log.finalize() if not backend.log.finalized else backend.log


# -- client --


class WireFrontend:
    """Python client for the wire protocol; mirrors the in-process frontend."""

    def __init__(self, rfile, wfile):
        self._rfile = rfile
        self._wfile = wfile
        frame = read_frame(rfile)
        if frame is None or frame[0] != TAG_EPISODE_INFO:
            raise ProtocolError("expected EpisodeInfo on connect")
        self.info = decode_episode_info(frame[1])

    @classmethod
    def connect_tcp(cls, host, port):
        sock = socket.create_connection((host, port))
        return cls(sock.makefile("rb"), sock.makefile("wb"))

    @classmethod
    def connect_stdio(cls):
        import sys

        return cls(sys.stdin.buffer, sys.stdout.buffer)

    def _request(self, frame, expect_tag):
        self._wfile.write(frame)
        self._wfile.flush()
        response = read_frame(self._rfile)
        if response is None:
            raise ProtocolError("server closed the connection")
        tag, payload = response
        if tag == TAG_ERROR:
            raise decode_error(payload)
        if tag != expect_tag:
            raise ProtocolError(f"expected tag 0x{expect_tag:02x}, got 0x{tag:02x}")
        return payload

    def append_desired_action(self, action):
        payload = self._request(
            encode_frame(TAG_APPEND_ACTION, encode_append_action(action)), TAG_ACK_TIMESTEP
        )
        return struct.unpack("<Q", payload)[0]

    def get_robot_observation(self, t):
        payload = self._request(
            encode_frame(TAG_GET_ROBOT_OBS, struct.pack("<Q", t)), TAG_ROBOT_OBS
        )
        return decode_robot_obs(payload)

    def get_camera_observation(self, t):
        payload = self._request(
            encode_frame(TAG_GET_CAMERA_OBS, struct.pack("<Q", t)), TAG_CAMERA_OBS
        )
        return decode_camera_obs(payload)

    def episode_info(self):
        return self.info

    def close(self):
        try:
            self._wfile.close()
        finally:
            self._rfile.close()
