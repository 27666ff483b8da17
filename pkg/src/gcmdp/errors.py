"""Exception hierarchy for the gcmdp library.

Every failure raised by the library is a ``ValueError`` subclass, so callers
that only care about "bad input or unsolvable request" can catch that.
"""

from typing import Any, List, Optional


class GcMdpError(ValueError):
    """Base class for all gcmdp errors."""


class ParseError(GcMdpError):
    """Raised when a model file cannot be parsed."""


class ValidationError(GcMdpError):
    """Raised when a model violates the Mdp invariants.

    Attributes:
        issues: The validation issues that caused the error
    """

    def __init__(self, message: str, issues: Optional[List[Any]] = None):
        super().__init__(message)
        self.issues = list(issues or [])


class ExpansionBudgetExceeded(GcMdpError):
    """Raised when materializing a lazy model exceeds the state cap."""


class PreconditionViolated(GcMdpError):
    """Raised when an operation is called outside its precondition."""


class GcViolation(GcMdpError):
    """Raised when a model fails the general convergence condition.

    Attributes:
        report: The GcReport listing the witnesses
    """

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class CapReached(GcMdpError):
    """Raised when an iteration cap is hit before the tolerance.

    Attributes:
        trace: The partial ConvergenceTrace
        value: The last computed value function
    """

    def __init__(self, message: str, trace: Any = None, value: Any = None):
        super().__init__(message)
        self.trace = trace
        self.value = value


class EnumerationCapExceeded(GcMdpError):
    """Raised when brute-force policy enumeration would exceed its cap."""


class HorizonCapExceeded(GcMdpError):
    """Raised when the epsilon-optimal construction needs too many stages."""


class ConditionViolated(GcMdpError):
    """Raised when a convergence condition does not hold.

    Attributes:
        report: The report listing the failing states and slacks
    """

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class NotAFixedPoint(GcMdpError):
    """Raised when a function expected to satisfy J = T(J) does not."""


class TailDiverges(GcMdpError):
    """Raised when the maximal total cost is infinite where it is needed.

    Attributes:
        report: The report with the diverging states marked uncertified
    """

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class NotDiscounted(GcMdpError):
    """Raised when a discounted-only check is run on an undiscounted model."""
