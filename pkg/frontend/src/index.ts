export {
  EpisodeFinished,
  ProtocolError,
  RoboBenchError,
  TooOld,
  WrongDimension,
} from "./errors.js";
export {
  Action,
  ActionKind,
  CameraObservation,
  EpisodeInfo,
  FrameReader,
  Pose,
  RobotObservation,
  zeroTorque,
} from "./messages.js";
export { PlatformFrontend } from "./client.js";
