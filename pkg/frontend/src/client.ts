/** Promise-based client for one robot episode over TCP.
 *
 * The server answers exactly one response per request, so requests are
 * serialized through an internal queue; callers can still fire them
 * without awaiting in between.
 */

import net from "node:net";

import { ProtocolError } from "./errors.js";
import {
  Action,
  CameraObservation,
  EpisodeInfo,
  FrameReader,
  RobotObservation,
  TAG_ACK_TIMESTEP,
  TAG_APPEND_ACTION,
  TAG_CAMERA_OBS,
  TAG_EPISODE_INFO,
  TAG_ERROR,
  TAG_GET_CAMERA_OBS,
  TAG_GET_ROBOT_OBS,
  TAG_ROBOT_OBS,
  decodeAckTimestep,
  decodeCameraObservation,
  decodeEpisodeInfo,
  decodeError,
  decodeRobotObservation,
  encodeAppendAction,
  encodeFrame,
  encodeTimestep,
} from "./messages.js";

interface Pending {
  expectTag: number;
  resolve: (payload: Buffer) => void;
  reject: (error: Error) => void;
}

export class PlatformFrontend {
  private constructor(
    private readonly socket: net.Socket,
    public readonly info: EpisodeInfo,
    private readonly pending: Pending[],
  ) {}

  /** Connect and wait for the EpisodeInfo frame the server sends first.
   *
   * With no arguments the address comes from ROBOBENCH_ROBOT_ADDR
   * ("host:port").
   */
  static connect(host?: string, port?: number): Promise<PlatformFrontend> {
    if (host === undefined || port === undefined) {
      const addr = process.env.ROBOBENCH_ROBOT_ADDR;
      if (!addr) {
        throw new ProtocolError(
          "no address given and ROBOBENCH_ROBOT_ADDR is not set",
        );
      }
      const [h, p] = addr.split(":");
      host = h;
      port = Number(p);
    }
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port: port! });
      const reader = new FrameReader();
      const pending: Pending[] = [];
      let frontend: PlatformFrontend | undefined;

      socket.on("error", (err) => {
        if (!frontend) reject(err);
        else frontend.failAll(err);
      });
      socket.on("close", () => {
        const err = new ProtocolError("server closed the connection");
        if (!frontend) reject(err);
        else frontend.failAll(err);
      });
      socket.on("data", (chunk) => {
        let frames;
        try {
          frames = reader.push(chunk);
        } catch (err) {
          socket.destroy();
          if (!frontend) reject(err as Error);
          else frontend.failAll(err as Error);
          return;
        }
        for (const frame of frames) {
          if (!frontend) {
            if (frame.tag !== TAG_EPISODE_INFO) {
              reject(new ProtocolError("expected EpisodeInfo on connect"));
              socket.destroy();
              return;
            }
            frontend = new PlatformFrontend(
              socket,
              decodeEpisodeInfo(frame.payload),
              pending,
            );
            resolve(frontend);
          } else {
            frontend.dispatch(frame.tag, frame.payload);
          }
        }
      });
    });
  }

  private dispatch(tag: number, payload: Buffer): void {
    const waiter = this.pending.shift();
    if (!waiter) {
      this.failAll(new ProtocolError(`unsolicited frame tag 0x${tag.toString(16)}`));
      return;
    }
    if (tag === TAG_ERROR) {
      waiter.reject(decodeError(payload));
    } else if (tag !== waiter.expectTag) {
      waiter.reject(
        new ProtocolError(
          `expected tag 0x${waiter.expectTag.toString(16)}, got 0x${tag.toString(16)}`,
        ),
      );
    } else {
      waiter.resolve(payload);
    }
  }

  private failAll(error: Error): void {
    while (this.pending.length) {
      this.pending.shift()!.reject(error);
    }
  }

  private request(tag: number, payload: Buffer, expectTag: number): Promise<Buffer> {
    return new Promise((resolve, reject) => {
      this.pending.push({ expectTag, resolve, reject });
      this.socket.write(encodeFrame(tag, payload));
    });
  }

  episodeInfo(): EpisodeInfo {
    return this.info;
  }

  /** Queue an action; resolves to the timestep at which it executes. */
  async appendDesiredAction(action: Action): Promise<number> {
    const payload = await this.request(
      TAG_APPEND_ACTION,
      encodeAppendAction(action),
      TAG_ACK_TIMESTEP,
    );
    return decodeAckTimestep(payload);
  }

  /** Proprioception of step t; the server blocks until t has executed. */
  async getRobotObservation(t: number): Promise<RobotObservation> {
    const payload = await this.request(
      TAG_GET_ROBOT_OBS,
      encodeTimestep(t),
      TAG_ROBOT_OBS,
    );
    return decodeRobotObservation(payload);
  }

  /** Object pose from the latest camera step at or before t. */
  async getCameraObservation(t: number): Promise<CameraObservation> {
    const payload = await this.request(
      TAG_GET_CAMERA_OBS,
      encodeTimestep(t),
      TAG_CAMERA_OBS,
    );
    return decodeCameraObservation(payload);
  }

  close(): void {
    this.socket.end();
  }
}
