"""Exception hierarchy for heatlab."""


class HeatlabError(Exception):
    """Base class for all heatlab errors."""


class InvalidGeometryError(HeatlabError, ValueError):
    """Model-space constructor received unusable geometry (too few nodes, nonpositive length)."""


class InvalidParameterError(HeatlabError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DimensionMismatchError(HeatlabError, ValueError):
    """A field or measure does not live on the space it is being used with."""


class DomainError(HeatlabError, ValueError):
    """An argument violates a mathematical domain restriction (t <= 0, f <= 0, ...)."""


class PreconditionError(HeatlabError, ValueError):
    """A verifier precondition (sign, lower bound) is violated."""


class InvalidPathError(HeatlabError, ValueError):
    """A discrete path has non-adjacent consecutive nodes."""


class InvalidProfileError(HeatlabError, ValueError):
    """A V-profile violates its endpoint or sign constraints."""


class NumericalError(HeatlabError, RuntimeError):
    """A numerical routine (eigensolver, LP) failed; carries diagnostics in the message."""


class ScenarioError(HeatlabError, ValueError):
    """A scenario file failed to parse or validate."""
