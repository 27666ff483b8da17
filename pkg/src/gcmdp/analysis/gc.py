"""The general convergence (GC) condition and related bounds."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from gcmdp.analysis.chains import chain_total_cost
from gcmdp.analysis.graph import can_reach, decompose_end_components, state_adjacency
from gcmdp.errors import GcViolation
from gcmdp.models.mdp import Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.value import ValueFn
from gcmdp.operators import iterate_to_fixed_point

logger = logging.getLogger(__name__)

SUP_NEG_TOLERANCE = 1e-12
SUP_NEG_MAX_ITER = 1_000_000


@dataclass
class GcReport:
    """Result of checking the GC condition.

    Attributes:
        holds: Whether every policy has finite expected negative cost
        witnesses: (state, action) pairs with negative cost inside an end component
        sup_neg: x -> sup over policies of J_pi^-(x), when GC holds
    """

    holds: bool
    witnesses: List[Tuple[int, int]] = field(default_factory=list)
    sup_neg: Optional[ValueFn] = None

    def to_dict(self, mdp: Mdp) -> Dict[str, Any]:
        """Serialize with state and action labels."""
        return {
            "holds": self.holds,
            "witnesses": [
                {"state": mdp.state_ids[s], "action": mdp.actions[s][a].label}
                for s, a in self.witnesses
            ],
            "sup_neg": None if self.sup_neg is None else self.sup_neg.to_list(),
        }


def check_gc(mdp: Mdp) -> GcReport:
    """Check the GC condition on a finite model.

    Undiscounted models satisfy GC iff no maximal end component contains a
    pair with negative cost; discounted models with finite costs always do.
    When GC holds, sup_neg is computed by value iteration of the maximizing
    operator with cost g- started from 0.

    Args:
        mdp: A validated finite model

    Returns:
        The report
    """
    witnesses: List[Tuple[int, int]] = []
    if not mdp.is_discounted:
        decomposition = decompose_end_components(mdp)
        for component in decomposition.components:
            for state, actions in component.actions.items():
                for action in actions:
                    if mdp.actions[state][action].cost_neg > 0:
                        witnesses.append((state, action))
    if witnesses:
        logger.info("%s violates GC: %d witness pairs", mdp.name, len(witnesses))
        return GcReport(False, witnesses, None)

    values, iterations, converged = iterate_to_fixed_point(
        mdp,
        mdp.costs_neg,
        np.zeros(mdp.n_states),
        maximize=True,
        tol=SUP_NEG_TOLERANCE,
        max_iter=SUP_NEG_MAX_ITER,
    )
    if not converged:
        logger.warning("sup_neg of %s not converged after %d backups", mdp.name, iterations)
    logger.debug("%s satisfies GC; sup_neg after %d backups", mdp.name, iterations)
    return GcReport(True, [], ValueFn(values))


def require_gc(mdp: Mdp) -> GcReport:
    """Run check_gc and raise when it fails.

    Raises:
        GcViolation: If GC does not hold
    """
    report = check_gc(mdp)
    if not report.holds:
        pairs = ", ".join(
            f"({mdp.state_ids[s]!r}, {mdp.actions[s][a].label!r})" for s, a in report.witnesses
        )
        raise GcViolation(f"{mdp.name} violates GC; negative cost repeats at {pairs}", report)
    return report


def policy_neg_cost(mdp: Mdp, policy: StationaryPolicy) -> ValueFn:
    """J_mu^-: expected total negative cost part under a stationary policy.

    Args:
        mdp: A validated finite model
        policy: The policy to evaluate

    Returns:
        The finite function J_mu^-

    Raises:
        GcViolation: If GC does not hold
    """
    require_gc(mdp)
    policy.check(mdp)
    choice = np.array(policy.choice)
    return ValueFn(
        chain_total_cost(
            mdp.policy_matrix(choice), mdp.policy_costs(choice, "neg"), mdp.discount
        )
    )


def max_total_cost(mdp: Mdp, tol: float = SUP_NEG_TOLERANCE) -> ValueFn:
    """Maximal expected total cost H(x) = sup over policies of E{sum g}.

    H is +inf exactly at the states that can reach an end component holding
    a positive-cost pair (undiscounted case). Elsewhere it is the limit of
    maximizing value iteration from 0.

    Args:
        mdp: A validated finite model satisfying GC
        tol: Convergence tolerance

    Returns:
        The maximal total cost, entries finite or +inf
    """
    start = np.zeros(mdp.n_states)
    if not mdp.is_discounted:
        decomposition = decompose_end_components(mdp)
        positive = np.zeros(mdp.n_states, dtype=bool)
        for component in decomposition.components:
            for state, actions in component.actions.items():
                if any(mdp.actions[state][a].cost > 0 for a in actions):
                    positive[list(component.states)] = True
        start[can_reach(state_adjacency(mdp), positive)] = np.inf
    values, iterations, converged = iterate_to_fixed_point(
        mdp, mdp.costs, start, maximize=True, tol=tol, max_iter=SUP_NEG_MAX_ITER
    )
    if not converged:
        logger.warning("maximal total cost of %s not converged", mdp.name)
    logger.debug(
        "%s: maximal total cost infinite at %d states", mdp.name, int(np.isinf(values).sum())
    )
    return ValueFn(values)
