"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CocogenError(Exception):
    """Base class for all cocogen errors."""


class DimensionMismatch(CocogenError):
    """A vector or matrix does not match the number of organizations."""


class InvariantViolation(CocogenError):
    """A model field violates its declared invariant."""

    def __init__(self, field: str, detail: str):
        super().__init__(f"{field}: {detail}")
        self.field = field
        self.detail = detail


class NonNegativeZWeight(CocogenError):
    """An organization's game weight is not strictly negative."""

    def __init__(self, org: int, value: float):
        super().__init__(f"z weight of organization {org} is {value!r}, expected < 0")
        self.org = org
        self.value = value


class InvalidScenario(CocogenError):
    """A scenario cannot be used for evaluation or solving."""


class ScenarioValidationError(InvalidScenario):
    """Aggregate of every invariant violation found in one scenario."""

    def __init__(self, violations: list[CocogenError]):
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"{len(violations)} violation(s): {lines}")
        self.violations = violations


class ZeroTotalData(CocogenError):
    """Local plus generated data is zero, so the error law is undefined."""


class IndexOutOfRange(CocogenError, IndexError):
    """Organization index outside [0, N)."""


class SameOrganization(CocogenError):
    """A pairwise transfer was requested between an organization and itself."""


class InstanceTooLarge(CocogenError):
    """Exhaustive grid search refused: too many organizations or grid points."""


class InsufficientPoints(CocogenError):
    """Too few distinct curve points to fit the error law."""


class DegenerateFit(CocogenError):
    """Curve fit produced non-positive scale or exponent."""


class NonPositiveShifted(CocogenError):
    """No offset candidate keeps every shifted error value positive."""


class ConvexityViolation(CocogenError):
    """Numerical convexity probe found a counterexample."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness
