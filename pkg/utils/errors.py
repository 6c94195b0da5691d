"""Exception types raised by the potential-algebra library."""
from typing import Iterable, List, Optional, Sequence


class PotentialAlgebraError(Exception):
    """Base class for every library error"""


class PoleError(PotentialAlgebraError, ValueError):
    """Evaluation at (or within the guard radius of) a true pole"""

    def __init__(self, message: str, location: Optional[complex] = None):
        super().__init__(message)
        self.location = location


class NotABoundStateError(PotentialAlgebraError, ValueError):
    """Requested level index violates n < m - 1/2"""


class NonNormalizableError(PotentialAlgebraError, ValueError):
    """Parameters outside the regime where the state decays on its domain"""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__(
            "Non-normalizable parameter regime: " + "; ".join(self.violations)
        )


class GridTooShortError(PotentialAlgebraError, ValueError):
    """Grid has fewer points than the finite-difference stencil needs"""


class DegenerateRecurrenceError(PotentialAlgebraError, ValueError):
    """Zero denominator in a polynomial three-term recurrence"""


class NonFiniteValueError(PotentialAlgebraError, ValueError):
    """A special function overflowed or produced NaN"""


class NonFinitePotentialError(PotentialAlgebraError, ValueError):
    """Potential produced NaN/Inf on one or more grid nodes"""

    def __init__(self, indices: Iterable[int], locations: Iterable[float]):
        self.indices: List[int] = list(indices)
        self.locations: List[float] = list(locations)
        preview = ", ".join(
            f"#{i} (x={x:.6g})" for i, x in zip(self.indices[:5], self.locations[:5])
        )
        more = f" and {len(self.indices) - 5} more" if len(self.indices) > 5 else ""
        super().__init__(f"Non-finite potential at node(s) {preview}{more}")


class ConvergenceError(PotentialAlgebraError, RuntimeError):
    """Eigensolver failed to converge or violated its backward-error bound"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class VerificationFailure(PotentialAlgebraError):
    """At least one verification check failed"""

    def __init__(self, failed_checks: Sequence[str]):
        self.failed_checks = list(failed_checks)
        super().__init__("Verification failed: " + ", ".join(self.failed_checks))
