"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A network parameter violates a scheme constraint."""


class PlanConsistencyError(RuntimeError):
    """An internally inconsistent delivery plan was detected."""


class PlanFormatError(ValueError):
    """A plan file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SolverError(RuntimeError):
    """Beamformer design failed or was ill-posed."""


class RankDeficiencyError(SolverError):
    """Null-space projection is degenerate for a zero-forcing stream."""
