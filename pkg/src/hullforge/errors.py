"""Exception hierarchy.

Every domain failure derives from :class:`HullforgeError`; the CLI maps these
to exit code 1 and prints ``error=<Kind>: <detail>``.
"""

from __future__ import annotations


class HullforgeError(Exception):
    """Base class for domain errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


# --- parameters / geometry -------------------------------------------------


class RangeViolation(HullforgeError):
    def __init__(self, field: str, value: float, lo: float, hi: float):
        self.field = field
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(f"{field}={value!r} outside ({lo}, {hi})")

    def __eq__(self, other):
        if not isinstance(other, RangeViolation):
            return NotImplemented
        return (self.field, self.value, self.lo, self.hi) == (
            other.field,
            other.value,
            other.lo,
            other.hi,
        )

    def __hash__(self):
        return hash((self.field, self.value, self.lo, self.hi))


class ValidationError(HullforgeError):
    """Raised by ``validate_params``; carries every violation found."""

    def __init__(self, violations: list[RangeViolation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ArityError(HullforgeError):
    pass


class NonFiniteError(HullforgeError):
    pass


class DomainError(HullforgeError):
    pass


class DraftError(HullforgeError):
    pass


class MeshError(HullforgeError):
    pass


# --- hydrodynamics ---------------------------------------------------------


class QuadratureError(HullforgeError):
    def __init__(self, message: str, achieved: float = float("nan"), cell=None):
        self.achieved = achieved
        self.cell = cell
        super().__init__(message)


class ReynoldsError(HullforgeError):
    pass


class ExtrapolationError(HullforgeError):
    pass


# --- learning --------------------------------------------------------------


class EmptyDataError(HullforgeError):
    pass


class KRangeError(HullforgeError):
    pass


class SingleClusterError(HullforgeError):
    pass


class DegenerateComponentError(HullforgeError):
    pass


class PerplexityError(HullforgeError):
    pass


class SamplingError(HullforgeError):
    pass


# --- pipeline --------------------------------------------------------------


class HeaderMismatch(HullforgeError):
    pass


class EmptyFile(HullforgeError):
    pass


class ParseError(HullforgeError):
    def __init__(self, line: int, detail: str):
        self.line = line
        super().__init__(f"line {line}: {detail}")


class BudgetExhausted(HullforgeError):
    def __init__(self, accepted_so_far: int, attempts: int):
        self.accepted_so_far = accepted_so_far
        self.attempts = attempts
        super().__init__(f"accepted {accepted_so_far} after {attempts} attempts")


class IoError(HullforgeError):
    pass
