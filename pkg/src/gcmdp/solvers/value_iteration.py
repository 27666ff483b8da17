"""Value iteration drivers: from zero, from above, increasing and transfinite."""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from gcmdp.analysis.gc import require_gc
from gcmdp.analysis.graph import almost_sure_reach, decompose_end_components
from gcmdp.config import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
    DEFAULT_WINDOW,
    DIVERGENCE_THRESHOLD,
)
from gcmdp.errors import CapReached
from gcmdp.models.mdp import Mdp
from gcmdp.models.value import ValueFn, distance
from gcmdp.operators import OperatorKind, apply_array, iterate_to_fixed_point
from gcmdp.solvers.trace import ConvergenceTrace, Regime, run_iteration

logger = logging.getLogger(__name__)

AUXILIARY_TOLERANCE = 1e-12
AUXILIARY_MAX_ITER = 1_000_000


def _positive_model_value(mdp: Mdp, costs: np.ndarray, label: str) -> np.ndarray:
    """Optimal total cost of a nonnegative cost problem, with exact +inf.

    A state has finite value iff some policy reaches, with probability one,
    an end component made of zero-cost pairs. The remaining entries come
    from value iteration started at 0; values above the divergence
    threshold are declared +inf.
    """
    start = np.zeros(mdp.n_states)
    if not mdp.is_discounted:
        zero_pairs = costs == 0
        zero_components = decompose_end_components(mdp, zero_pairs).state_mask(mdp.n_states)
        finite = almost_sure_reach(mdp, zero_components)
        start[~finite] = np.inf
    values, iterations, converged = iterate_to_fixed_point(
        mdp, costs, start, tol=AUXILIARY_TOLERANCE, max_iter=AUXILIARY_MAX_ITER
    )
    if not converged:
        logger.warning("%s of %s not converged after %d backups", label, mdp.name, iterations)
    values[values > DIVERGENCE_THRESHOLD] = np.inf
    logger.debug(
        "%s of %s: %d backups, %d infinite entries",
        label,
        mdp.name,
        iterations,
        int(np.isinf(values).sum()),
    )
    return values


def compute_j_star_plus(mdp: Mdp) -> ValueFn:
    """J*+: optimal cost of the problem with one-stage cost g+.

    Raises:
        GcViolation: If GC does not hold
    """
    require_gc(mdp)
    return ValueFn(_positive_model_value(mdp, mdp.costs_pos, "J*+"))


def compute_j_star_minus(mdp: Mdp) -> ValueFn:
    """J*-: minimal expected total of the negative cost parts g-.

    Raises:
        GcViolation: If GC does not hold
    """
    require_gc(mdp)
    return ValueFn(_positive_model_value(mdp, mdp.costs_neg, "J*-"))


def _t_step(mdp: Mdp, kind: OperatorKind = OperatorKind.T):
    return lambda values: apply_array(kind, mdp, values)


def solve_from_above(
    mdp: Mdp,
    start: str = "plus",
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
    window: int = DEFAULT_WINDOW,
    keep_every: int = 1,
) -> Tuple[ValueFn, ConvergenceTrace]:
    """Compute J* by value iteration started above it.

    T^n(J*+) and T^n(J*+ - J*-) both decrease monotonically to J*.

    Args:
        mdp: A validated finite model
        start: "plus" for J*+, "plus_minus" for J*+ - J*-
        tol: Convergence tolerance
        max_iter: Iteration cap
        window: Cycle detection window
        keep_every: Trace thinning stride

    Returns:
        (J*, trace)

    Raises:
        GcViolation: If GC does not hold
        CapReached: If the cap is hit before tol; carries the partial trace
    """
    if start not in ("plus", "plus_minus"):
        raise ValueError(f"unknown start {start!r}; expected 'plus' or 'plus_minus'")
    j_plus = compute_j_star_plus(mdp).values
    initial = j_plus
    if start == "plus_minus":
        initial = j_plus - compute_j_star_minus(mdp).values

    trace = run_iteration(
        _t_step(mdp),
        initial,
        max_iter,
        tol=tol,
        window=window,
        keep_every=keep_every,
        label=f"{mdp.name} from above",
    )
    if trace.regime is not Regime.CONVERGED:
        raise CapReached(
            f"value iteration from above on {mdp.name} did not reach tolerance "
            f"{tol} within {max_iter} iterations",
            trace=trace,
            value=trace.last,
        )
    logger.info("%s: J* after %d iterations from above", mdp.name, trace.iterations_used)
    return trace.limit, trace


def vi_from(
    mdp: Mdp,
    J0: ValueFn,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOLERANCE,
    window: int = DEFAULT_WINDOW,
    keep_every: int = 1,
    watch: Optional[int] = None,
    kind: OperatorKind = OperatorKind.T,
) -> ConvergenceTrace:
    """Trace T^n(J0) and classify it.

    On a slice of a lazy model the root state is watched and the number of
    iterations is capped at the root's exactness horizon.

    Args:
        mdp: A validated model
        J0: Start function (no -inf)
        max_iter: Iteration cap
        tol: Convergence tolerance
        window: Cycle detection window
        keep_every: Trace thinning stride
        watch: State whose sequence is classified (default: slice root)
        kind: Operator to iterate

    Returns:
        The trace
    """
    if len(J0) != mdp.n_states:
        raise ValueError(f"start function has {len(J0)} entries, model has {mdp.n_states}")
    if mdp.root is not None and mdp.exact_horizon is not None:
        if watch is None:
            watch = mdp.root
        exact = mdp.exact_horizon[watch]
        if math.isfinite(exact) and exact < max_iter:
            logger.debug("capping iterations at the exact horizon %d", int(exact))
            max_iter = int(exact)
    return run_iteration(
        _t_step(mdp, kind),
        J0.values,
        max_iter,
        tol=tol,
        window=window,
        keep_every=keep_every,
        watch=watch,
        label=f"{mdp.name} {kind.value}-iteration",
    )


def vi_tilde(
    mdp: Mdp,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOLERANCE,
    window: int = DEFAULT_WINDOW,
    keep_every: int = 1,
    start: Optional[ValueFn] = None,
) -> ConvergenceTrace:
    """Trace J_(n+1) = max(J_n, T(J_n)) from 0 (or from start).

    The iterates are nondecreasing; they converge to J* whenever J* >= 0
    is real-valued.
    """
    initial = np.zeros(mdp.n_states) if start is None else start.values
    return run_iteration(
        _t_step(mdp, OperatorKind.T_TILDE),
        initial,
        max_iter,
        tol=tol,
        window=window,
        keep_every=keep_every,
        label=f"{mdp.name} T~-iteration",
    )


def transfinite_surrogate(
    mdp: Mdp,
    max_passes: int = 16,
    start: Optional[ValueFn] = None,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Tuple[ValueFn, int]:
    """Finite surrogate of transfinite T~-iteration.

    One pass iterates T~ to its numerical limit and then applies T~ once
    more to that limit; the recursion stops when a pass leaves the function
    unchanged within tol.

    Args:
        mdp: A validated model
        max_passes: Largest number of passes
        start: Start function (default 0)
        tol: Convergence tolerance
        max_iter: Iteration cap per pass

    Returns:
        (final function, passes used)

    Raises:
        CapReached: If a pass does not converge or max_passes is exhausted
    """
    current = ValueFn.zeros(mdp.n_states) if start is None else start
    for passes in range(1, max_passes + 1):
        trace = vi_tilde(mdp, max_iter=max_iter, tol=tol, start=current)
        if trace.regime is not Regime.CONVERGED:
            raise CapReached(
                f"T~-iteration pass {passes} on {mdp.name} did not converge",
                trace=trace,
                value=trace.last,
            )
        limit = trace.limit.values
        following = apply_array(OperatorKind.T_TILDE, mdp, limit)
        if distance(following, limit) < tol:
            logger.info("%s: transfinite surrogate stable after %d passes", mdp.name, passes)
            return ValueFn(following), passes
        current = ValueFn(following)
    raise CapReached(
        f"transfinite surrogate on {mdp.name} not stable after {max_passes} passes",
        value=current,
    )
