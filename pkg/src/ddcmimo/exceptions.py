"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ShapeMismatchError(ValueError):
    """Array operands have incompatible shapes."""


class SingularityError(ValueError):
    """A kernel was evaluated at a singular point (e.g. coincident points)."""


class DegenerateObjectiveError(RuntimeError):
    """The beamforming objective or an update collapsed to zero."""


class ConfigError(ValueError):
    """An experiment configuration could not be parsed or validated."""
