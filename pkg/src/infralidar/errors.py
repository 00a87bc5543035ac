"""Exception types shared across the package."""


class InfralidarError(Exception):
    """Base class for all package-specific errors."""


class ContractViolationError(InfralidarError, ValueError):
    """An argument violated a documented precondition."""


class SceneBuildError(InfralidarError, ValueError):
    """The scene description cannot be turned into a queryable scene."""


class ParseError(InfralidarError, ValueError):
    """A file or payload failed to parse.

    Carries enough context (file path and the JSON pointer / line that
    failed) for the CLI to print an actionable message.
    """

    def __init__(self, message: str, *, path: str | None = None, location: str | None = None):
        self.path = path
        self.location = location
        prefix = ""
        if path:
            prefix += f"{path}: "
        if location:
            prefix += f"at {location}: "
        super().__init__(prefix + message)


class TrajectoryError(InfralidarError, ValueError):
    """Queried time falls outside trajectory coverage, or keyframes invalid."""


class MetricsUndefinedError(InfralidarError, ValueError):
    """A metric is mathematically undefined for the given input (e.g. empty region)."""


class PresetError(InfralidarError, ValueError):
    """Unknown LiDAR preset or malformed preset file."""


class SweepSpecError(InfralidarError, ValueError):
    """Sweep specification is empty or inconsistent."""
