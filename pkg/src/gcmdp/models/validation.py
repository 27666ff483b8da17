"""Validation models for MDPs."""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List

from gcmdp.config import PROBABILITY_TOLERANCE

if TYPE_CHECKING:
    from gcmdp.models.mdp import Mdp


@dataclass
class ValidationIssue:
    """Represents a single invariant violation.

    Attributes:
        message: What is wrong
        location: The state (and action) where it occurred
        severity: "error" or "warning"
    """

    message: str
    location: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ValidationResult:
    """Represents the result of validating a model.

    Attributes:
        valid: Whether the validation passed
        errors: List of violations
        warnings: List of non-fatal findings
    """

    valid: bool = True
    errors: List[ValidationIssue] = field(default_factory=list)
    warnings: List[ValidationIssue] = field(default_factory=list)

    def add_error(self, message: str, location: str) -> None:
        """Add an error and mark the result invalid.

        Args:
            message: The error message
            location: The location where the error occurred
        """
        self.errors.append(ValidationIssue(message, location, "error"))
        self.valid = False

    def add_warning(self, message: str, location: str) -> None:
        """Add a warning.

        Args:
            message: The warning message
            location: The location where the warning occurred
        """
        self.warnings.append(ValidationIssue(message, location, "warning"))

    def merge(self, other: "ValidationResult") -> None:
        """Merge another validation result into this one.

        Args:
            other: The validation result to merge
        """
        self.valid = self.valid and other.valid
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)

    def summary(self) -> str:
        """Join all errors into one message."""
        return "; ".join(str(issue) for issue in self.errors)


def check_mdp(mdp: "Mdp", tolerance: float = PROBABILITY_TOLERANCE) -> ValidationResult:
    """Check every Mdp invariant and collect the violations.

    Args:
        mdp: The model to check
        tolerance: Allowed deviation of probability sums from 1

    Returns:
        The validation result
    """
    result = ValidationResult()

    if not (0.0 < mdp.discount <= 1.0):
        result.add_error(f"discount {mdp.discount} outside (0, 1]", "model")

    if len(set(mdp.state_ids)) != len(mdp.state_ids):
        result.add_error("duplicate state labels", "model")

    n_states = mdp.n_states
    for state, label in enumerate(mdp.state_ids):
        actions = mdp.actions[state]
        if not actions:
            result.add_error("empty action set", f"state {label!r}")
            continue
        for action in actions:
            where = f"state {label!r}, action {action.label!r}"
            if not math.isfinite(action.cost):
                result.add_error("non-finite cost", where)
            if not action.transitions:
                result.add_error("empty transition list", where)
                continue
            total = 0.0
            for target, probability in action.transitions:
                if not 0 <= target < n_states:
                    result.add_error(f"transition to unknown state index {target}", where)
                if not (0.0 <= probability <= 1.0) or math.isnan(probability):
                    result.add_error(f"probability {probability} outside [0, 1]", where)
                total += probability
            if abs(total - 1.0) > tolerance:
                result.add_error(f"transition probabilities sum to {total!r}", where)

    return result


def validate(mdp: "Mdp") -> List[ValidationIssue]:
    """List the invariant violations of a model.

    Args:
        mdp: The model to check

    Returns:
        The violations; empty iff every invariant holds
    """
    return check_mdp(mdp).errors
