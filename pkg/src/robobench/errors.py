"""Exception hierarchy shared by all robobench modules."""


class RoboBenchError(Exception):
    """Base class for all errors raised by this package."""


class WrongDimension(RoboBenchError):
    """An action vector does not have exactly 9 entries."""


class EpisodeFinished(RoboBenchError):
    """The episode step budget is exhausted; no further interaction possible."""


class TooOld(RoboBenchError):
    """Requested timestep has fallen out of the history buffer."""


class NumericalDivergence(RoboBenchError):
    """A plant state magnitude exceeded the sanity bound (configuration bug)."""


class OutOfOrder(RoboBenchError):
    """A step was recorded out of sequence."""


class BadMagic(RoboBenchError):
    """Log bytes do not start with the expected magic."""


class BadVersion(RoboBenchError):
    """Log format version is not supported."""


class CrcMismatch(RoboBenchError):
    """Log checksum does not match its contents."""


class Truncated(RoboBenchError):
    """Log bytes end before the declared content does."""


class LengthMismatch(RoboBenchError):
    """A trajectory does not have the expected number of entries."""


class EmptyLog(RoboBenchError):
    """The log contains no records to compute metrics from."""


class BadPredicate(RoboBenchError):
    """A filter expression failed to parse.

    Carries ``position``, the character offset of the failure.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvalidSpec(RoboBenchError):
    """A job spec failed validation."""


class UnknownJob(RoboBenchError):
    """No job with the given id exists."""


class NotFinished(RoboBenchError):
    """The job has not produced a result yet."""


class NothingToAssign(RoboBenchError):
    """No queued job / idle robot pair is available."""


class ProtocolError(RoboBenchError):
    """Malformed message on a client connection."""
