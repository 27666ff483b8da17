"""Dynamic programming operators on extended-real value functions."""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from gcmdp.models.mdp import Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.value import ValueFn


class OperatorKind(Enum):
    """The operator family.

    T uses the cost g, T_plus uses g+, T_minus uses -g-, T_zero uses zero cost,
    all minimizing. T_tilde is max(J, T(J)). M_sup uses zero cost and
    maximizes, giving the one-step sup-expectation.
    """

    T = "T"
    T_PLUS = "T_plus"
    T_MINUS = "T_minus"
    T_ZERO = "T_zero"
    T_TILDE = "T_tilde"
    M_SUP = "M_sup"

    @property
    def maximizes(self) -> bool:
        return self is OperatorKind.M_SUP


@dataclass(frozen=True)
class BackupResult:
    """Result of one backup.

    Attributes:
        value: The backed-up function
        argmin: Per state, the lowest action index attaining the min (max for M_sup)
    """

    value: ValueFn
    argmin: Tuple[int, ...]


def stage_costs(mdp: Mdp, kind: OperatorKind) -> np.ndarray:
    """Per-pair one-stage cost used by an operator."""
    if kind in (OperatorKind.T, OperatorKind.T_TILDE):
        return mdp.costs
    if kind is OperatorKind.T_PLUS:
        return mdp.costs_pos
    if kind is OperatorKind.T_MINUS:
        return -mdp.costs_neg
    return np.zeros(mdp.n_pairs)


def q_values(mdp: Mdp, costs: np.ndarray, values: np.ndarray) -> np.ndarray:
    """c(x,u) + beta * sum q(y|x,u) J(y) per pair.

    A pair with positive probability of reaching a +inf entry gets +inf;
    zero-probability entries are never stored, so 0 * inf does not occur.
    """
    matrix = mdp.transition_matrix
    inf_mask = np.isinf(values)
    finite = np.where(inf_mask, 0.0, values)
    q = costs + mdp.discount * (matrix @ finite)
    if inf_mask.any():
        q[(matrix @ inf_mask.astype(float)) > 0] = np.inf
    return q


def reduce_pairs(
    mdp: Mdp, q: np.ndarray, maximize: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-state min (or max) over pairs with lowest-index tie-breaking.

    Returns:
        The reduced values and the attaining action index per state
    """
    reducer = np.maximum if maximize else np.minimum
    best = reducer.reduceat(q, mdp.pair_offsets)
    hits = np.flatnonzero(q == best[mdp.pair_state])
    _, first = np.unique(mdp.pair_state[hits], return_index=True)
    argbest = hits[first] - mdp.pair_offsets
    return best, argbest


def backup(
    mdp: Mdp, costs: np.ndarray, values: np.ndarray, maximize: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """One Bellman backup on raw arrays."""
    return reduce_pairs(mdp, q_values(mdp, costs, values), maximize)


def apply_array(kind: OperatorKind, mdp: Mdp, values: np.ndarray) -> np.ndarray:
    """Apply an operator to a raw array, without the ValueFn wrapper."""
    result, _ = backup(mdp, stage_costs(mdp, kind), values, kind.maximizes)
    if kind is OperatorKind.T_TILDE:
        result = np.maximum(values, result)
    return result


def apply(kind: OperatorKind, mdp: Mdp, J: ValueFn) -> BackupResult:
    """Apply an operator once.

    Args:
        kind: The operator
        mdp: A validated model
        J: Function with no -inf entry

    Returns:
        The backed-up function and the attaining actions
    """
    values = J.values
    result, argbest = backup(mdp, stage_costs(mdp, kind), values, kind.maximizes)
    if kind is OperatorKind.T_TILDE:
        result = np.maximum(values, result)
    return BackupResult(ValueFn(result), tuple(int(a) for a in argbest))


def apply_policy_array(
    mdp: Mdp, choice: np.ndarray, values: np.ndarray, costs: Optional[np.ndarray] = None
) -> np.ndarray:
    """T_mu on raw arrays; costs default to g."""
    rows = mdp.pair_offsets + np.asarray(choice, dtype=np.int64)
    q = q_values(mdp, mdp.costs if costs is None else costs, values)
    return q[rows]


def apply_policy(mdp: Mdp, policy: StationaryPolicy, J: ValueFn) -> ValueFn:
    """T_mu(J)(x) = g(x, mu(x)) + beta * sum q(y|x,mu(x)) J(y)."""
    policy.check(mdp)
    return ValueFn(apply_policy_array(mdp, np.array(policy.choice), J.values))


def apply_n(kind: OperatorKind, mdp: Mdp, J: ValueFn, n: int) -> List[ValueFn]:
    """Return [J, K(J), ..., K^n(J)] for the operator K."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    iterates = [J]
    values = J.values
    for _ in range(n):
        values = apply_array(kind, mdp, values)
        iterates.append(ValueFn(values))
    return iterates


def iterate_to_fixed_point(
    mdp: Mdp,
    costs: np.ndarray,
    start: np.ndarray,
    maximize: bool = False,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
) -> Tuple[np.ndarray, int, bool]:
    """Iterate one backup until successive iterates differ by less than tol.

    +inf entries of start stay +inf. Used for the auxiliary nonnegative
    problems (J*+, J*-, sup_neg, maximal total cost).

    Returns:
        The last iterate, the number of backups and whether tol was met
    """
    values = np.asarray(start, dtype=float)
    finite = np.isfinite(values)
    for iteration in range(1, max_iter + 1):
        updated, _ = backup(mdp, costs, values, maximize)
        if np.array_equal(np.isfinite(updated), finite):
            delta = np.max(np.abs(updated[finite] - values[finite]), initial=0.0)
            if delta < tol:
                return updated, iteration, True
        finite = np.isfinite(updated)
        values = updated
    return values, max_iter, False
