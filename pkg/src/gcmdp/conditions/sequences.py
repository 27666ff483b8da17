"""Per-state sequence analysis shared by the condition checkers."""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List

import numpy as np

from gcmdp.config import CYCLE_TOLERANCE, SIGN_SLACK
from gcmdp.conditions.reports import Certificate
from gcmdp.models.mdp import Mdp
from gcmdp.operators import OperatorKind, apply_array
from gcmdp.solvers.trace import SequenceBounds, sequence_bounds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignClassification:
    """States whose sequence u_n satisfies liminf u_n >= 0 or limsup u_n >= 0.

    Attributes:
        nonneg_liminf: {x : liminf u_n(x) >= 0}
        nonneg_limsup: {x : limsup u_n(x) >= 0}
        heuristic: States whose bounds come from a window without a cycle
        bounds: Per-state bounds
        horizon_used: Largest n examined at any state
    """

    nonneg_liminf: FrozenSet[int]
    nonneg_limsup: FrozenSet[int]
    heuristic: FrozenSet[int]
    bounds: List[SequenceBounds]
    horizon_used: int


def iterate_sequence(
    mdp: Mdp, kind: OperatorKind, start: np.ndarray, steps: int
) -> np.ndarray:
    """Rows K^0(start), ..., K^steps(start) for the operator K."""
    rows = [np.asarray(start, dtype=float)]
    for _ in range(steps):
        rows.append(apply_array(kind, mdp, rows[-1]))
    return np.vstack(rows)


def prefix_lengths(mdp: Mdp, horizon: int) -> np.ndarray:
    """Per-state largest n for which K^n is exact: min(horizon, exact horizon)."""
    lengths = np.full(mdp.n_states, horizon, dtype=np.int64)
    if mdp.exact_horizon is not None:
        exact = mdp.exact_horizon
        finite = np.isfinite(exact)
        lengths[finite] = np.minimum(lengths[finite], exact[finite].astype(np.int64))
    return lengths


def classify_signs(
    mdp: Mdp, sequences: np.ndarray, horizon: int, window: int
) -> SignClassification:
    """Classify each state by the sign of liminf and limsup of its column.

    Column x is read only up to its exact prefix length; the bounds come from
    the trailing window of that prefix.
    """
    lengths = prefix_lengths(mdp, horizon)
    bounds = []
    liminf_ok, limsup_ok, heuristic = set(), set(), set()
    for state in range(mdp.n_states):
        prefix = sequences[: lengths[state] + 1, state]
        estimate = sequence_bounds(prefix, window, CYCLE_TOLERANCE)
        bounds.append(estimate)
        if estimate.liminf >= -SIGN_SLACK:
            liminf_ok.add(state)
        if estimate.limsup >= -SIGN_SLACK:
            limsup_ok.add(state)
        if estimate.heuristic:
            heuristic.add(state)
    if heuristic:
        logger.debug("%s: %d states without a detected cycle", mdp.name, len(heuristic))
    return SignClassification(
        frozenset(liminf_ok),
        frozenset(limsup_ok),
        frozenset(heuristic),
        bounds,
        int(lengths.max(initial=0)),
    )


def assign_certificates(
    n_states: int,
    strong: FrozenSet[int],
    weak: FrozenSet[int],
    weak_certificate: Certificate,
    heuristic: FrozenSet[int],
    strong_certificate: Certificate = Certificate.LIMIT,
) -> Dict[int, Certificate]:
    """Map each state to its certificate; window estimates are never certified."""
    certified = {}
    for state in range(n_states):
        if state in heuristic:
            certified[state] = Certificate.UNCERTIFIED
        elif state in strong:
            certified[state] = strong_certificate
        elif state in weak:
            certified[state] = weak_certificate
        else:
            certified[state] = Certificate.UNCERTIFIED
    return certified


def extended_difference(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """left - right with +inf - +inf taken as 0."""
    both = np.isinf(left) & np.isinf(right) & (np.sign(left) == np.sign(right))
    with np.errstate(invalid="ignore"):
        result = left - right
    result[both] = 0.0
    return result


def is_global(classification: FrozenSet[int], n_states: int, heuristic: FrozenSet[int]) -> bool:
    """True when every state is in the set and none rests on a window estimate."""
    return len(classification) == n_states and not heuristic
