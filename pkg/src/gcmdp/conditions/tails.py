"""Tail-type conditions: sup-expectations of J* and of the tail total cost."""

import logging

import numpy as np

from gcmdp.analysis.gc import max_total_cost, require_gc
from gcmdp.config import DEFAULT_HORIZON, DEFAULT_WINDOW
from gcmdp.conditions.reports import Certificate, PartialConvergenceReport
from gcmdp.conditions.sequences import (
    assign_certificates,
    classify_signs,
    is_global,
    iterate_sequence,
)
from gcmdp.errors import TailDiverges
from gcmdp.models.mdp import Mdp
from gcmdp.models.value import ValueFn
from gcmdp.operators import OperatorKind

logger = logging.getLogger(__name__)


def sup_expectations(mdp: Mdp, J: ValueFn, steps: int) -> np.ndarray:
    """Rows M^n(J) = sup over policies of E{J(x_n)} (discounted by beta^n), n = 0..steps."""
    return iterate_sequence(mdp, OperatorKind.M_SUP, J.values, steps)


def _report_from_upper(
    theorem: str, mdp: Mdp, upper: np.ndarray, horizon: int, window: int, witness: dict
) -> PartialConvergenceReport:
    # S0 = {liminf upper <= 0}, S0+ = {limsup upper <= 0}: the sign tests on -upper.
    signs = classify_signs(mdp, -upper, horizon, window)
    certified = assign_certificates(
        mdp.n_states,
        signs.nonneg_liminf,
        signs.nonneg_limsup,
        Certificate.LIMSUP,
        signs.heuristic,
    )
    global_convergence = is_global(signs.nonneg_liminf, mdp.n_states, signs.heuristic)
    if global_convergence:
        logger.info("%s: T^n(0) -> J* certified on every state", mdp.name)
    return PartialConvergenceReport(
        theorem=theorem,
        condition_holds=True,
        s_zero_plus=signs.nonneg_liminf,
        s_zero=signs.nonneg_limsup,
        certified=certified,
        horizon_used=signs.horizon_used,
        heuristic_flag=bool(signs.heuristic),
        heuristic_states=signs.heuristic,
        global_convergence=global_convergence,
        witness=witness,
    )


def check_van_hee(
    mdp: Mdp,
    j_star: ValueFn,
    horizon: int = DEFAULT_HORIZON,
    window: int = DEFAULT_WINDOW,
) -> PartialConvergenceReport:
    """Certify convergence of T^n(0) from the sup-expectations M^n(J*).

    limsup T^n(0)(x) = J*(x) on S0 = {liminf M^n(J*) <= 0} and
    T^n(0)(x) -> J*(x) on S0+ = {limsup M^n(J*) <= 0}. No further condition
    is needed.

    Args:
        mdp: A validated model satisfying GC
        j_star: The optimal cost (+inf entries allowed)
        horizon: Largest n
        window: Trailing window for liminf/limsup

    Returns:
        The report; global_convergence is set when S0+ is every state

    Raises:
        GcViolation: If GC does not hold
    """
    require_gc(mdp)
    upper = sup_expectations(mdp, j_star, horizon)
    report = _report_from_upper("van_hee", mdp, upper, horizon, window, {})
    logger.debug(
        "%s van Hee: S0+ %s, S0 %s",
        mdp.name,
        sorted(report.s_zero_plus),
        sorted(report.s_zero),
    )
    return report


def check_tail_condition(
    mdp: Mdp,
    horizon: int = DEFAULT_HORIZON,
    window: int = DEFAULT_WINDOW,
    strict: bool = True,
) -> PartialConvergenceReport:
    """Certify convergence from the n-tail sup values h_n = M^n(H).

    H is the maximal expected total cost, so h_n(x) is the largest expected
    cost collected from stage n on. Classification is as in check_van_hee
    with h_n in place of M^n(J*).

    Args:
        mdp: A validated model satisfying GC
        horizon: Largest n
        window: Trailing window for liminf/limsup
        strict: Raise when some tail sequence is +inf

    Returns:
        The report; states with infinite tails are uncertified

    Raises:
        GcViolation: If GC does not hold
        TailDiverges: If strict and some state has an infinite tail
    """
    require_gc(mdp)
    total = max_total_cost(mdp)
    upper = sup_expectations(mdp, total, horizon)
    diverging = [
        s for s in range(mdp.n_states) if np.isposinf(upper[:, s]).any()
    ]
    witness = {
        "max_total_cost": total.to_list(),
        "diverging": [mdp.state_ids[s] for s in diverging],
    }
    report = _report_from_upper("tail", mdp, upper, horizon, window, witness)
    for state in diverging:
        report.certified[state] = Certificate.UNCERTIFIED
    if diverging and strict:
        labels = ", ".join(repr(mdp.state_ids[s]) for s in diverging)
        raise TailDiverges(f"maximal tail cost of {mdp.name} is infinite at {labels}", report)
    return report
