"""Exception types shared across the package."""


class JumpfreeError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(JumpfreeError):
    """Inputs are degenerate (e.g. zero total radius in a merge)."""


class PreconditionError(JumpfreeError):
    """A documented precondition of an operation was violated."""


class ValidationError(JumpfreeError):
    """Scenario or input validation failed.

    Carries a list of (field_path, message) pairs in ``issues``.
    """

    def __init__(self, issues):
        if isinstance(issues, str):
            issues = [("", issues)]
        self.issues = list(issues)
        msg = "; ".join(f"{path}: {m}" if path else m for path, m in self.issues)
        super().__init__(msg)


class UsageError(JumpfreeError):
    """Operation invoked in a mode that does not apply (e.g. transverse mass in 2D)."""


class JumpSetTooLarge(JumpfreeError):
    """Smallness hypothesis on the jump set fails for the requested horizon.

    ``max_T`` is the largest horizon that the measured budget still admits.
    """

    def __init__(self, message, max_T=None):
        super().__init__(message)
        self.max_T = max_T


class BudgetViolation(JumpfreeError):
    """Grown balls escape the extended domain for the chosen horizon/budget."""


class StageError(JumpfreeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
