"""Constructions of epsilon-optimal and optimal policies."""

import logging
from typing import Dict, List, Optional, Union

import numpy as np

from gcmdp.analysis.gc import require_gc
from gcmdp.config import DEFAULT_EPSILON_HORIZON_CAP, DEFAULT_TOLERANCE
from gcmdp.errors import GcMdpError, HorizonCapExceeded, PreconditionViolated
from gcmdp.models.mdp import Mdp
from gcmdp.models.policy import (
    NoOptimalCertificate,
    PartitionBlock,
    SemiMarkovPolicy,
    StationaryPolicy,
)
from gcmdp.models.value import ValueFn, distance
from gcmdp.operators import OperatorKind, backup, stage_costs
from gcmdp.solvers.evaluation import evaluate_policy, evaluate_semi_markov
from gcmdp.solvers.value_iteration import compute_j_star_plus, solve_from_above

logger = logging.getLogger(__name__)

VERIFY_TOLERANCE = 1e-8


def construct_epsilon_optimal(
    mdp: Mdp,
    epsilon: float,
    j_star: Optional[ValueFn] = None,
    cap: int = DEFAULT_EPSILON_HORIZON_CAP,
    tol: float = DEFAULT_TOLERANCE,
) -> SemiMarkovPolicy:
    """Build a nonrandomized semi-Markov policy with cost at most J* + epsilon.

    With J_k = T^k(J*+) and A_k = {x : J_k(x) <= J*(x) + epsilon/4}, a start
    state first entering A_k follows the k-stage policy that is greedy for
    T at J_(k-1), ..., J_0 and then the tail policy greedy for T+ at J*+.

    Args:
        mdp: A validated finite model with finite J*
        epsilon: Positive slack
        j_star: Precomputed J* (default: solve_from_above)
        cap: Largest stage count k tried
        tol: Convergence tolerance for J*

    Returns:
        The policy, verified by direct evaluation

    Raises:
        GcViolation: If GC does not hold
        PreconditionViolated: If epsilon <= 0 or J* is not finite
        HorizonCapExceeded: If some state enters no A_k with k <= cap
    """
    if not epsilon > 0:
        raise PreconditionViolated("epsilon must be positive")
    require_gc(mdp)
    j_plus = compute_j_star_plus(mdp).values
    if j_star is None:
        j_star, _ = solve_from_above(mdp, tol=tol)
    star = j_star.values
    if not np.isfinite(star).all():
        raise PreconditionViolated(f"J* of {mdp.name} is not finite everywhere")

    threshold = star + epsilon / 4
    first_k = np.full(mdp.n_states, -1)
    iterates: List[np.ndarray] = [j_plus]
    greedy: List[np.ndarray] = []
    costs = stage_costs(mdp, OperatorKind.T)
    k = 0
    while True:
        entering = (first_k < 0) & (iterates[k] <= threshold)
        first_k[entering] = k
        if (first_k >= 0).all():
            break
        if k >= cap:
            missing = [mdp.state_ids[s] for s in np.flatnonzero(first_k < 0)]
            raise HorizonCapExceeded(f"states {missing} enter no A_k with k <= {cap}")
        following, argmin = backup(mdp, costs, iterates[k])
        greedy.append(argmin)
        iterates.append(following)
        k += 1

    _, tail_choice = backup(mdp, stage_costs(mdp, OperatorKind.T_PLUS), j_plus)
    tail = StationaryPolicy(tuple(tail_choice))

    blocks = []
    for k in sorted(set(int(v) for v in first_k)):
        # Stage t of a k-stage block is greedy at J_(k-t-1).
        stages = tuple(StationaryPolicy(tuple(greedy[k - t - 1])) for t in range(k))
        states = tuple(int(s) for s in np.flatnonzero(first_k == k))
        blocks.append(PartitionBlock(states, k, stages, tail))
    policy = SemiMarkovPolicy(tuple(blocks))

    achieved = evaluate_semi_markov(mdp, policy).values
    excess = achieved - (star + epsilon)
    if (excess > VERIFY_TOLERANCE).any():
        bad = [mdp.state_ids[s] for s in np.flatnonzero(excess > VERIFY_TOLERANCE)]
        raise GcMdpError(f"constructed policy misses the epsilon bound at {bad}")
    logger.info(
        "%s: epsilon-optimal policy with %d blocks, largest k = %d",
        mdp.name,
        len(blocks),
        max(b.k for b in blocks),
    )
    return policy


def extract_optimal_stationary(
    mdp: Mdp, j_star: ValueFn, tol: float = VERIFY_TOLERANCE
) -> Union[StationaryPolicy, NoOptimalCertificate]:
    """Greedy optimal stationary policy for a nonnegative J*.

    Args:
        mdp: A validated finite model
        j_star: The optimal cost, J* >= 0 and J* = T(J*)
        tol: Tolerance for the fixed point check and the verification

    Returns:
        The greedy policy when its cost equals J*, else a certificate listing
        the states where it does not

    Raises:
        PreconditionViolated: If J* has entries below -tol or is not a fixed point of T
        GcViolation: If GC does not hold
    """
    star = j_star.values
    negative = np.flatnonzero(star < -tol)
    if negative.size:
        labels = [mdp.state_ids[s] for s in negative]
        raise PreconditionViolated(f"J* is negative at {labels}")
    backed_up, argmin = backup(mdp, mdp.costs, star)
    if distance(backed_up, star) > tol:
        raise PreconditionViolated("j_star is not a fixed point of T within tolerance")

    policy = StationaryPolicy(tuple(argmin))
    achieved, _, _ = evaluate_policy(mdp, policy)
    gaps: Dict[int, float] = {}
    for state, (a, b) in enumerate(zip(achieved.values, star)):
        if np.isinf(a) or np.isinf(b):
            if a != b:
                gaps[state] = float(a - b) if np.isfinite(a - b) else float("inf")
        elif abs(a - b) > tol:
            gaps[state] = float(a - b)
    if gaps:
        logger.info("%s: greedy policy misses J* at %d states", mdp.name, len(gaps))
        return NoOptimalCertificate(
            sorted(gaps), "greedy selection does not attain J*", gaps
        )
    return policy
