"""Exception types shared across the toolkit."""


class TaskAllocError(Exception):
    """Base class for all taskalloc errors."""


class DomainError(TaskAllocError):
    """Evaluation outside the stable region of a latency model."""


class SaturationError(TaskAllocError):
    """Inversion target lies above the supremum of a bounded latency model."""


class InversionError(TaskAllocError):
    """A bisection bracket could not be established.

    For the built-in queue models this cannot happen on feasible inputs;
    for user-supplied models it signals a non-monotone latency function.
    """


class InfeasibleLoadError(TaskAllocError):
    """Offered load is non-positive or exceeds the guarded total capacity."""


class ConvergenceError(TaskAllocError):
    """An iterative procedure hit its iteration cap before converging."""


class UnsupportedModelError(TaskAllocError):
    """The requested operation has no rule for this queue model."""


class ScenarioParseError(TaskAllocError):
    """A scenario document was rejected; carries the offending location."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(message if location is None else f"{location}: {message}")
