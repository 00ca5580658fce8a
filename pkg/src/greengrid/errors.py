"""Exception hierarchy shared across the package."""


class DomainError(Exception):
    """Base class for all domain-level failures."""


class NotFoundError(DomainError):
    """Unknown facility, month or other missing entity."""


class SchemaError(DomainError):
    """Malformed input file or payload."""


class MissingPrerequisiteError(DomainError):
    """An operation was invoked before its inputs exist (no invoice, no model...)."""


class ConvergenceError(DomainError):
    """Iterative optimization failed to reach its threshold."""

    def __init__(self, message: str, last_error: float | None = None):
        super().__init__(message)
        self.last_error = last_error


class InfeasibleError(DomainError):
    """Optimization instance has no feasible solution."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []
