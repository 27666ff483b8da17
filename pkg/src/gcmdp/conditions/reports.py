"""Condition descriptions and the reports produced by the checkers."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Optional, Union

import numpy as np

from gcmdp.analysis.gc import GcReport
from gcmdp.models.mdp import Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.value import ValueFn, encode_number

J_STAR = "J_star"


class Certificate(str, Enum):
    """What a checker concludes about T^n(0)(x)."""

    LIMIT = "limit_equals_Jstar"
    LIMSUP = "limsup_equals_Jstar"
    CONDITIONAL = "conditional_on_convergence"
    UNCERTIFIED = "uncertified"


@dataclass(frozen=True)
class BridgingCondition:
    """The inequality T^n_bar(0) >= alpha * R + phi (or J_inf >= alpha * R + phi).

    Attributes:
        n_bar: Number of backups from 0 on the left-hand side
        alpha: Weight of the reference cost, in (0, 1]
        phi: Finite offset function
        reference: "J_star", or a stationary policy whose cost J_mu is used
    """

    n_bar: int
    alpha: float
    phi: ValueFn
    reference: Union[str, StationaryPolicy] = J_STAR

    def __post_init__(self):
        """Validate the condition parameters."""
        if self.n_bar < 0:
            raise ValueError("n_bar must be nonnegative")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.phi.is_finite():
            raise ValueError("phi must be finite-valued")
        if isinstance(self.reference, str) and self.reference != J_STAR:
            raise ValueError(f"unknown reference {self.reference!r}")

    @property
    def uses_policy(self) -> bool:
        return isinstance(self.reference, StationaryPolicy)


def _labels(mdp: Mdp, states) -> list:
    return [mdp.state_ids[s] for s in sorted(states)]


@dataclass
class PartialConvergenceReport:
    """Outcome of a partial-convergence checker.

    Attributes:
        theorem: Name of the check that produced the report
        condition_holds: Whether the checked inequality holds everywhere
        s_zero_plus: States where the full limit is certified
        s_zero: States where the weaker conclusion applies (superset of s_zero_plus)
        certified: Per state, the conclusion drawn
        horizon_used: Largest n used in the sequence analysis
        heuristic_flag: True when some state's bounds come from a window, not a cycle
        slack: Per-state slack of the inequality, if one was checked
        heuristic_states: States whose bounds are window estimates
        global_convergence: True when T^n(0) -> J* is certified on every state
        witness: Parameters of the check
    """

    theorem: str
    condition_holds: bool
    s_zero_plus: FrozenSet[int]
    s_zero: FrozenSet[int]
    certified: Dict[int, Certificate]
    horizon_used: int
    heuristic_flag: bool = False
    slack: Optional[np.ndarray] = None
    heuristic_states: FrozenSet[int] = frozenset()
    global_convergence: bool = False
    witness: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.s_zero_plus <= self.s_zero:
            raise ValueError("s_zero_plus must be a subset of s_zero")

    def states_with(self, certificate: Certificate) -> FrozenSet[int]:
        """States carrying the given certificate."""
        return frozenset(s for s, c in self.certified.items() if c is certificate)

    def failing_states(self, tolerance: float) -> FrozenSet[int]:
        """States where the slack is below -tolerance."""
        if self.slack is None:
            return frozenset()
        return frozenset(int(s) for s in np.flatnonzero(self.slack < -tolerance))

    def to_dict(self, mdp: Mdp) -> Dict[str, Any]:
        """Serialize in the shared condition report layout."""
        witness = dict(self.witness)
        witness["certified"] = {
            mdp.state_ids[s]: c.value for s, c in sorted(self.certified.items())
        }
        witness["horizon_used"] = self.horizon_used
        witness["global_convergence"] = self.global_convergence
        witness["heuristic_states"] = _labels(mdp, self.heuristic_states)
        if self.slack is not None:
            witness["slack"] = {
                label: encode_number(v) for label, v in zip(mdp.state_ids, self.slack)
            }
        return {
            "theorem": self.theorem,
            "holds": self.condition_holds,
            "s_zero": _labels(mdp, self.s_zero),
            "s_zero_plus": _labels(mdp, self.s_zero_plus),
            "heuristic": self.heuristic_flag,
            "witness": witness,
        }


@dataclass
class ConditionReport:
    """A yes/no condition report in the shared layout.

    Attributes:
        theorem: Name of the check
        holds: Whether the condition holds
        s_zero: States covered by the weaker conclusion
        s_zero_plus: States where convergence is certified
        heuristic: Whether any part rests on a window estimate
        witness: Check-specific evidence
    """

    theorem: str
    holds: bool
    s_zero: FrozenSet[int] = frozenset()
    s_zero_plus: FrozenSet[int] = frozenset()
    heuristic: bool = False
    witness: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_gc_report(cls, mdp: Mdp, report: GcReport) -> "ConditionReport":
        """Wrap a GC check so it serializes like the other checks."""
        return cls(theorem="gc", holds=report.holds, witness=report.to_dict(mdp))

    def to_dict(self, mdp: Mdp) -> Dict[str, Any]:
        """Serialize with state labels."""
        return {
            "theorem": self.theorem,
            "holds": self.holds,
            "s_zero": _labels(mdp, self.s_zero),
            "s_zero_plus": _labels(mdp, self.s_zero_plus),
            "heuristic": self.heuristic,
            "witness": self.witness,
        }
