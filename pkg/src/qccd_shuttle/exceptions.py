"""Exception hierarchy shared by all modules."""


class ShuttleError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ShuttleError, ValueError):
    """An input (architecture, placement, config) violates its contract."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class QasmSyntaxError(ShuttleError):
    """Malformed OpenQASM source."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnsupportedFeatureError(ShuttleError):
    """Valid input that uses something outside the supported subset."""


class NoCycleError(ShuttleError):
    """No rectangle is available to build a conflict-resolving cycle."""


class SaturationError(ShuttleError):
    """A free memory edge was required but every memory edge is occupied."""


class LivelockError(ShuttleError):
    """The scheduler exceeded its step guard without finishing the circuit."""

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}


class ScheduleFormatError(ShuttleError):
    """A schedule document could not be parsed."""


class BudgetExceededError(ShuttleError):
    """The exact search ran out of its state budget."""

    def __init__(self, message: str, stats: dict | None = None):
        super().__init__(message)
        self.stats = stats or {}


class UnknownElementError(ShuttleError, KeyError):
    """An edge or node id does not exist in the architecture graph."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown element"
