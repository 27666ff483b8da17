"""Policy evaluation and the brute-force stationary oracle."""

import itertools
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from gcmdp.analysis.chains import chain_pushforward_matrix, chain_total_cost
from gcmdp.analysis.gc import require_gc
from gcmdp.config import DEFAULT_ENUMERATION_CAP, resolve_cap
from gcmdp.errors import EnumerationCapExceeded
from gcmdp.models.mdp import Mdp
from gcmdp.models.policy import SemiMarkovPolicy, StationaryPolicy
from gcmdp.models.value import ValueFn
from gcmdp.operators import apply_policy_array

logger = logging.getLogger(__name__)


def _evaluate(mdp: Mdp, choice: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    matrix = mdp.policy_matrix(choice)
    plus = chain_total_cost(matrix, mdp.policy_costs(choice, "pos"), mdp.discount)
    minus = chain_total_cost(matrix, mdp.policy_costs(choice, "neg"), mdp.discount)
    # GC keeps minus finite, so inf - finite = inf is the only extended case.
    return plus - minus, plus, minus


def evaluate_policy(
    mdp: Mdp, policy: StationaryPolicy
) -> Tuple[ValueFn, ValueFn, ValueFn]:
    """Evaluate a stationary policy.

    Args:
        mdp: A validated finite model
        policy: The policy

    Returns:
        (J, J_plus, J_minus) with J = J_plus - J_minus

    Raises:
        GcViolation: If GC does not hold
    """
    require_gc(mdp)
    policy.check(mdp)
    total, plus, minus = _evaluate(mdp, np.array(policy.choice))
    return ValueFn(total), ValueFn(plus), ValueFn(minus)


def brute_force_j_star(
    mdp: Mdp, cap: Optional[int] = None
) -> Tuple[ValueFn, StationaryPolicy]:
    """Best cost over all deterministic stationary policies (J^s = J* for finite controls).

    Args:
        mdp: A validated finite model satisfying GC
        cap: Largest number of policies to enumerate (default from config)

    Returns:
        The pointwise minimum and a policy attaining it at every state; if no
        single policy does, the one attaining it at the most states

    Raises:
        EnumerationCapExceeded: If the product of action counts exceeds cap
        GcViolation: If GC does not hold
    """
    if cap is None:
        cap = resolve_cap(DEFAULT_ENUMERATION_CAP)
    counts = mdp.action_counts()
    total = math.prod(counts)
    if total > cap:
        raise EnumerationCapExceeded(f"{total} stationary policies exceed the cap {cap}")
    require_gc(mdp)

    evaluated = []
    best = np.full(mdp.n_states, np.inf)
    for choice in itertools.product(*(range(c) for c in counts)):
        values, _, _ = _evaluate(mdp, np.array(choice))
        evaluated.append((choice, values))
        best = np.minimum(best, values)

    chosen = None
    chosen_cover = -1
    for choice, values in evaluated:
        cover = int(np.sum(np.isclose(values, best, rtol=0.0, atol=1e-12)))
        if cover > chosen_cover:
            chosen, chosen_cover = choice, cover
        if cover == mdp.n_states:
            break
    logger.debug("%s: enumerated %d stationary policies", mdp.name, total)
    return ValueFn(best), StationaryPolicy(chosen)


def chain_pushforward(mdp: Mdp, policy: StationaryPolicy, J: ValueFn, n: int) -> ValueFn:
    """E_x^mu{J(x_n)} under a stationary policy."""
    policy.check(mdp)
    matrix = mdp.policy_matrix(np.array(policy.choice))
    return ValueFn(chain_pushforward_matrix(matrix, J.values, n))


def evaluate_semi_markov(mdp: Mdp, policy: SemiMarkovPolicy) -> ValueFn:
    """Total cost of a semi-Markov policy from every start state.

    From a start state in a block with k stages the cost is
    T_mu0 T_mu1 ... T_mu(k-1) (J_tail) at that state.

    Raises:
        GcViolation: If GC does not hold
    """
    require_gc(mdp)
    policy.check(mdp)
    tails: Dict[Tuple[int, ...], np.ndarray] = {}
    result = np.zeros(mdp.n_states)
    for block in policy.partition:
        tail = block.tail.choice
        if tail not in tails:
            tails[tail] = _evaluate(mdp, np.array(tail))[0]
        values = tails[tail]
        for stage in reversed(block.stages):
            values = apply_policy_array(mdp, np.array(stage.choice), values)
        idx = list(block.states)
        result[idx] = values[idx]
    return ValueFn(result)
