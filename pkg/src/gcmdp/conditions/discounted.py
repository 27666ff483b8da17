"""Global convergence checks that apply to discounted models only."""

import logging
from typing import Optional, Sequence

import numpy as np

from gcmdp.analysis.gc import require_gc
from gcmdp.conditions.reports import ConditionReport
from gcmdp.errors import NotDiscounted
from gcmdp.models.mdp import Mdp
from gcmdp.models.value import ValueFn
from gcmdp.operators import OperatorKind, apply_array

logger = logging.getLogger(__name__)

MAX_N_BAR = 32
ALPHA_GRID = (1.0, 0.5, 0.25, 0.1)


def search_positive_bridging(
    mdp: Mdp,
    j_star: ValueFn,
    max_n_bar: int = MAX_N_BAR,
    alphas: Sequence[float] = ALPHA_GRID,
) -> Optional[dict]:
    """Find (n_bar, alpha, b) with T+^n_bar(0) >= alpha * J* + b and b <= 0.

    For each candidate b = min(0, min slack). The largest b wins; ties go to
    the smallest n_bar, then to the earlier alpha in the grid.

    Returns:
        {"n_bar", "alpha", "b"}, or None when J* has +inf entries
    """
    star = j_star.values
    if not np.isfinite(star).all():
        return None
    best = None
    values = np.zeros(mdp.n_states)
    for n_bar in range(max_n_bar + 1):
        if n_bar:
            values = apply_array(OperatorKind.T_PLUS, mdp, values)
        if not np.isfinite(values).all():
            break
        for alpha in alphas:
            b = min(0.0, float(np.min(values - alpha * star, initial=0.0)))
            if best is None or b > best["b"]:
                best = {"n_bar": n_bar, "alpha": alpha, "b": b}
    return best


def check_ud_corollaries(
    mdp: Mdp,
    j_star: ValueFn,
    max_n_bar: int = MAX_N_BAR,
    alphas: Sequence[float] = ALPHA_GRID,
) -> ConditionReport:
    """Global convergence checks for discounted models.

    The first fires when J* is bounded above. The second fires when the
    expected negative cost is bounded over states and policies and
    T+^n_bar(0) >= alpha * J* + b for some n_bar, alpha in (0, 1] and b <= 0.
    Either one certifies T^n(0) -> J* at every state.

    Args:
        mdp: A validated discounted model
        j_star: The optimal cost
        max_n_bar: Largest n_bar searched
        alphas: Weights searched

    Returns:
        A report whose witness names the checks that fired

    Raises:
        NotDiscounted: If the discount factor is 1
        GcViolation: If GC does not hold
    """
    if not mdp.is_discounted:
        raise NotDiscounted(f"{mdp.name} is undiscounted")
    gc_report = require_gc(mdp)
    star = j_star.values

    bounded_above = bool(np.isfinite(star).all())
    sup_neg = float(np.max(gc_report.sup_neg.values, initial=0.0))
    neg_bounded = bool(np.isfinite(sup_neg))
    search = search_positive_bridging(mdp, j_star, max_n_bar, alphas) if neg_bounded else None

    holds = bounded_above or search is not None
    everything = frozenset(range(mdp.n_states)) if holds else frozenset()
    logger.debug(
        "%s: bounded above %s, positive-part bridging %s", mdp.name, bounded_above, search
    )
    return ConditionReport(
        theorem="ud_corollaries",
        holds=holds,
        s_zero=everything,
        s_zero_plus=everything,
        witness={
            "bounded_above": bounded_above,
            "max_j_star": float(np.max(star, initial=-np.inf)) if bounded_above else "inf",
            "negative_part_bound": sup_neg if neg_bounded else "inf",
            "positive_part_bridging": search,
        },
    )
