/** Typed errors mirroring the server's wire error codes. */

export class RoboBenchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** An action vector did not have one value per joint. */
export class WrongDimension extends RoboBenchError {}

/** The episode step budget is exhausted. */
export class EpisodeFinished extends RoboBenchError {}

/** The requested timestep left the bounded history window. */
export class TooOld extends RoboBenchError {}

/** Malformed frame, unexpected tag, or an unmapped server-side failure. */
export class ProtocolError extends RoboBenchError {}

export const ERR_WRONG_DIMENSION = 1;
export const ERR_EPISODE_FINISHED = 2;
export const ERR_TOO_OLD = 3;
export const ERR_PROTOCOL = 4;

export function errorFromCode(code: number, message: string): RoboBenchError {
  switch (code) {
    case ERR_WRONG_DIMENSION:
      return new WrongDimension(message);
    case ERR_EPISODE_FINISHED:
      return new EpisodeFinished(message);
    case ERR_TOO_OLD:
      return new TooOld(message);
    default:
      return new ProtocolError(message);
  }
}
