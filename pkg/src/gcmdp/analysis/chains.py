"""Total cost of nonnegative costs on a Markov chain."""

import logging

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from gcmdp.analysis.graph import can_reach, closed_classes

logger = logging.getLogger(__name__)


def chain_total_cost(
    matrix: sparse.spmatrix, costs: np.ndarray, discount: float = 1.0
) -> np.ndarray:
    """Expected total discounted cost of a finite Markov chain.

    For discount 1 the value is +inf exactly at the states that reach, with
    positive probability, a closed class containing a positive cost; the rest
    is the solution of the linear system on the transient states.

    Args:
        matrix: State-by-state transition matrix
        costs: Nonnegative per-state costs
        discount: Discount factor in (0, 1]

    Returns:
        Value per state, entries finite or +inf
    """
    costs = np.asarray(costs, dtype=float)
    if (costs < 0).any():
        raise ValueError("chain_total_cost needs nonnegative costs")
    n = costs.shape[0]
    matrix = sparse.csr_matrix(matrix)
    identity = sparse.identity(n, format="csc")

    if discount < 1.0:
        return np.atleast_1d(spsolve((identity - discount * matrix).tocsc(), costs))

    classes = closed_classes(matrix)
    positive_classes = np.unique(classes[(classes >= 0) & (costs > 0)])
    diverging = can_reach(matrix, np.isin(classes, positive_classes) & (classes >= 0))

    values = np.zeros(n)
    values[diverging] = np.inf
    transient = (classes < 0) & ~diverging
    if transient.any():
        idx = np.flatnonzero(transient)
        sub = matrix[idx][:, idx]
        system = (sparse.identity(len(idx), format="csc") - sub).tocsc()
        values[idx] = np.atleast_1d(spsolve(system, costs[idx]))
    logger.debug("chain of %d states: %d diverging", n, int(diverging.sum()))
    return values


def chain_pushforward_matrix(matrix: sparse.spmatrix, values: np.ndarray, steps: int) -> np.ndarray:
    """E_x{J(x_n)} for a chain, with +inf entries propagated where reached."""
    result = np.asarray(values, dtype=float)
    matrix = sparse.csr_matrix(matrix)
    inf_mask = np.isinf(result)
    for _ in range(steps):
        finite = np.where(inf_mask, 0.0, result)
        reaches_inf = (matrix @ inf_mask.astype(float)) > 0
        result = matrix @ finite
        result[reaches_inf] = np.inf
        inf_mask = reaches_inf
    return result
