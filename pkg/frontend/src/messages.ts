/** Binary codecs for the robot wire protocol.
 *
 * Frame: u32 little-endian length, then 1 tag byte + payload (the length
 * covers tag + payload).  All numbers are little-endian; timesteps are
 * u64 on the wire but returned as plain numbers (episodes are far below
 * 2^53 steps).
 */

import { ProtocolError, errorFromCode } from "./errors.js";

export const TAG_APPEND_ACTION = 0x01;
export const TAG_ACK_TIMESTEP = 0x02;
export const TAG_GET_ROBOT_OBS = 0x03;
export const TAG_ROBOT_OBS = 0x04;
export const TAG_GET_CAMERA_OBS = 0x05;
export const TAG_CAMERA_OBS = 0x06;
export const TAG_ERROR = 0x07;
export const TAG_EPISODE_INFO = 0x08;

export const N_JOINTS = 9;

export type ActionKind = "torque" | "position";

export interface Action {
  kind: ActionKind;
  values: number[]; // one per joint
}

export interface RobotObservation {
  timestep: number;
  position: number[];
  velocity: number[];
  torque: number[];
  tipForce: number[];
}

export interface Pose {
  position: number[]; // x, y, z
  orientation: number[]; // quaternion x, y, z, w
}

export interface CameraObservation {
  timestep: number;
  objectPose: Pose;
  poseConfidence: number;
  images: Buffer[];
}

export interface EpisodeInfo {
  phase: number;
  level: number;
  goal: { level: number; pose: Pose };
  episodeSteps: number;
  controlRate: number;
}

const KIND_CODES: Record<ActionKind, number> = { torque: 0, position: 1 };

export function zeroTorque(): Action {
  return { kind: "torque", values: new Array(N_JOINTS).fill(0) };
}

export function encodeFrame(tag: number, payload: Buffer): Buffer {
  const frame = Buffer.alloc(4 + 1 + payload.length);
  frame.writeUInt32LE(1 + payload.length, 0);
  frame.writeUInt8(tag, 4);
  payload.copy(frame, 5);
  return frame;
}

export function encodeAppendAction(action: Action): Buffer {
  if (action.values.length !== N_JOINTS) {
    // reject locally; the payload layout is fixed at nine values
    throw new ProtocolError(
      `action must have ${N_JOINTS} values, got ${action.values.length}`,
    );
  }
  const payload = Buffer.alloc(1 + 8 * N_JOINTS);
  payload.writeUInt8(KIND_CODES[action.kind], 0);
  for (let i = 0; i < N_JOINTS; i++) {
    payload.writeDoubleLE(action.values[i], 1 + 8 * i);
  }
  return payload;
}

export function encodeTimestep(t: number): Buffer {
  const payload = Buffer.alloc(8);
  payload.writeBigUInt64LE(BigInt(t), 0);
  return payload;
}

export function decodeAckTimestep(payload: Buffer): number {
  return Number(payload.readBigUInt64LE(0));
}

function readDoubles(payload: Buffer, offset: number, n: number): number[] {
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) {
    out[i] = payload.readDoubleLE(offset + 8 * i);
  }
  return out;
}

export function decodeRobotObservation(payload: Buffer): RobotObservation {
  return {
    timestep: Number(payload.readBigUInt64LE(0)),
    position: readDoubles(payload, 8, 9),
    velocity: readDoubles(payload, 80, 9),
    torque: readDoubles(payload, 152, 9),
    tipForce: readDoubles(payload, 224, 3),
  };
}

export function decodeCameraObservation(payload: Buffer): CameraObservation {
  const timestep = Number(payload.readBigUInt64LE(0));
  const position = readDoubles(payload, 8, 3);
  const orientation = readDoubles(payload, 32, 4);
  const poseConfidence = payload.readDoubleLE(64);
  let offset = 72;
  const images: Buffer[] = [];
  for (let i = 0; i < 3; i++) {
    const n = payload.readUInt32LE(offset);
    offset += 4;
    images.push(payload.subarray(offset, offset + n));
    offset += n;
  }
  return { timestep, objectPose: { position, orientation }, poseConfidence, images };
}

export function decodeEpisodeInfo(payload: Buffer): EpisodeInfo {
  const phase = payload.readUInt8(0);
  const level = payload.readUInt8(1);
  const position = readDoubles(payload, 2, 3);
  const orientation = readDoubles(payload, 26, 4);
  return {
    phase,
    level,
    goal: { level, pose: { position, orientation } },
    episodeSteps: Number(payload.readBigUInt64LE(58)),
    controlRate: payload.readUInt32LE(66),
  };
}

export function decodeError(payload: Buffer): Error {
  const code = payload.readUInt16LE(0);
  return errorFromCode(code, payload.subarray(2).toString("utf8"));
}

/** Incremental frame splitter for a byte stream. */
export class FrameReader {
  private buffer: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Array<{ tag: number; payload: Buffer }> {
    this.buffer = this.buffer.length ? Buffer.concat([this.buffer, chunk]) : chunk;
    const frames: Array<{ tag: number; payload: Buffer }> = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const length = this.buffer.readUInt32LE(0);
      if (length < 1) {
        throw new ProtocolError("frame length must cover the tag byte");
      }
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.subarray(4, 4 + length);
      frames.push({ tag: body.readUInt8(0), payload: body.subarray(1) });
      this.buffer = this.buffer.subarray(4 + length);
    }
    return frames;
  }
}
