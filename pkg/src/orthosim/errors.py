"""Exception types shared across the simulator."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition or value invariant."""


class StreamDesyncError(RuntimeError):
    """Paired sensor streams disagree on timing beyond half a tick."""


class CalibrationError(RuntimeError):
    """Plant calibration anchors are infeasible."""


class ConfigError(ValueError):
    """A session config file failed to parse or validate."""
