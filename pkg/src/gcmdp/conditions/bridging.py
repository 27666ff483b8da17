"""Bridging-type conditions for partial convergence of T^n(0).

If T^n_bar(0) >= alpha * J* + phi with alpha in (0, 1] and phi finite, then
T^n(0)(x) -> J*(x) wherever liminf T0^n(phi)(x) >= 0, and further conclusions
hold where limsup T0^n(phi)(x) >= 0. The fixed point variant replaces
T^n_bar(0) with J_inf = limsup T^n(0) when J_inf is a fixed point of T.
"""

import logging
from typing import Optional

import numpy as np

from gcmdp.analysis.gc import require_gc
from gcmdp.config import (
    AGREEMENT_TOLERANCE,
    DEFAULT_HORIZON,
    DEFAULT_TOLERANCE,
    DEFAULT_WINDOW,
    SIGN_SLACK,
)
from gcmdp.conditions.reports import BridgingCondition, Certificate, PartialConvergenceReport
from gcmdp.conditions.sequences import (
    assign_certificates,
    classify_signs,
    extended_difference,
    is_global,
    iterate_sequence,
)
from gcmdp.errors import ConditionViolated, NotAFixedPoint, PreconditionViolated
from gcmdp.models.mdp import Mdp
from gcmdp.models.value import ValueFn, distance
from gcmdp.operators import OperatorKind, apply_array
from gcmdp.solvers.evaluation import evaluate_policy

logger = logging.getLogger(__name__)


def _reference_values(mdp: Mdp, cond: BridgingCondition, j_star: ValueFn) -> np.ndarray:
    if cond.uses_policy:
        cost, _, _ = evaluate_policy(mdp, cond.reference)
        return cost.values
    return j_star.values


def _condition_slack(mdp: Mdp, lhs: np.ndarray, cond: BridgingCondition, j_star: ValueFn):
    reference = _reference_values(mdp, cond, j_star)
    rhs = cond.alpha * reference + cond.phi.values
    return extended_difference(lhs, rhs)


def _witness(cond: BridgingCondition, mdp: Mdp) -> dict:
    if cond.uses_policy:
        reference = {"policy": cond.reference.to_labels(mdp)}
    else:
        reference = cond.reference
    return {
        "n_bar": cond.n_bar,
        "alpha": cond.alpha,
        "phi": cond.phi.to_list(),
        "reference": reference,
    }


def _require_fit(mdp: Mdp, cond: BridgingCondition) -> None:
    if len(cond.phi) != mdp.n_states:
        raise PreconditionViolated(
            f"phi has {len(cond.phi)} entries, model has {mdp.n_states}"
        )


def _check_phi_sequences(
    mdp: Mdp, cond: BridgingCondition, horizon: int
) -> np.ndarray:
    sequences = iterate_sequence(mdp, OperatorKind.T_ZERO, cond.phi.values, horizon)
    if not np.isfinite(sequences).all():
        raise PreconditionViolated("T0^n(phi) is not finite; phi is outside A0(S)")
    return sequences


def _violated(
    theorem: str, mdp: Mdp, cond: BridgingCondition, slack: np.ndarray
) -> ConditionViolated:
    report = PartialConvergenceReport(
        theorem=theorem,
        condition_holds=False,
        s_zero_plus=frozenset(),
        s_zero=frozenset(),
        certified={s: Certificate.UNCERTIFIED for s in range(mdp.n_states)},
        horizon_used=0,
        slack=slack,
        witness=_witness(cond, mdp),
    )
    failing = report.failing_states(SIGN_SLACK)
    details = ", ".join(f"{mdp.state_ids[s]!r}: {slack[s]:.6g}" for s in sorted(failing))
    return ConditionViolated(f"bridging inequality fails at {details}", report)


def check_bridging(
    mdp: Mdp,
    cond: BridgingCondition,
    j_star: ValueFn,
    horizon: int = DEFAULT_HORIZON,
    window: int = DEFAULT_WINDOW,
) -> PartialConvergenceReport:
    """Check T^n_bar(0) >= alpha * R + phi and derive the certified state sets.

    S0+ = {liminf T0^n(phi) >= 0} gets limit_equals_Jstar. States of
    S0 = {limsup T0^n(phi) >= 0} outside S0+ get limsup_equals_Jstar when
    n_bar = 0 and conditional_on_convergence otherwise.

    Args:
        mdp: A validated model satisfying GC
        cond: The condition
        j_star: The optimal cost
        horizon: Largest n for T0^n(phi)
        window: Trailing window for liminf/limsup

    Returns:
        The report

    Raises:
        GcViolation: If GC does not hold
        ConditionViolated: If the inequality fails; the error carries the slacks
        PreconditionViolated: If phi does not fit the model
    """
    require_gc(mdp)
    _require_fit(mdp, cond)
    lhs = np.zeros(mdp.n_states)
    for _ in range(cond.n_bar):
        lhs = apply_array(OperatorKind.T, mdp, lhs)
    slack = _condition_slack(mdp, lhs, cond, j_star)
    if (slack < -SIGN_SLACK).any():
        raise _violated("bridging", mdp, cond, slack)

    sequences = _check_phi_sequences(mdp, cond, horizon)
    signs = classify_signs(mdp, sequences, horizon, window)
    weak = Certificate.LIMSUP if cond.n_bar == 0 else Certificate.CONDITIONAL
    certified = assign_certificates(
        mdp.n_states, signs.nonneg_liminf, signs.nonneg_limsup, weak, signs.heuristic
    )
    logger.debug(
        "%s bridging: S0+ %d states, S0 %d states",
        mdp.name,
        len(signs.nonneg_liminf),
        len(signs.nonneg_limsup),
    )
    return PartialConvergenceReport(
        theorem="bridging",
        condition_holds=True,
        s_zero_plus=signs.nonneg_liminf,
        s_zero=signs.nonneg_limsup,
        certified=certified,
        horizon_used=signs.horizon_used,
        heuristic_flag=bool(signs.heuristic),
        slack=slack,
        heuristic_states=signs.heuristic,
        global_convergence=is_global(signs.nonneg_liminf, mdp.n_states, signs.heuristic),
        witness=_witness(cond, mdp),
    )


def _observed_j_infinity(mdp: Mdp, horizon: int, window: int):
    """limsup T^n(0) per state, with the states whose value is a window estimate."""
    sequences = iterate_sequence(mdp, OperatorKind.T, np.zeros(mdp.n_states), horizon)
    signs = classify_signs(mdp, sequences, horizon, window)
    limsup = np.array([bounds.limsup for bounds in signs.bounds])
    return limsup, signs.heuristic


def check_fixed_point_bridging(
    mdp: Mdp,
    cond: BridgingCondition,
    j_infinity: Optional[ValueFn],
    j_star: ValueFn,
    horizon: int = DEFAULT_HORIZON,
    window: int = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOLERANCE,
) -> PartialConvergenceReport:
    """Check J_inf = T(J_inf) and J_inf >= alpha * R + phi.

    J_inf is limsup T^n(0). It is observed from T^n(0) up to the horizon; a
    supplied j_infinity must agree with the observation at every state. When
    the observation is a window estimate at some state, the hypothesis is
    unconfirmed and no state is certified. Otherwise J_inf = J* is certified
    on S0+ (limsup_equals_Jstar) and, for states of S0 where T^n(0)
    converges, conditionally. cond.n_bar is not used.

    Args:
        mdp: A validated model satisfying GC
        cond: The condition
        j_infinity: limsup T^n(0), or None to use the observed one
        j_star: The optimal cost
        horizon: Largest n for T^n(0) and T0^n(phi)
        window: Trailing window for liminf/limsup
        tol: Fixed point tolerance (at least AGREEMENT_TOLERANCE for an observed J_inf)

    Raises:
        GcViolation: If GC does not hold
        NotAFixedPoint: If T(J_inf) differs from J_inf by more than tol
        PreconditionViolated: If j_infinity is not limsup T^n(0)
        ConditionViolated: If the inequality fails
    """
    require_gc(mdp)
    _require_fit(mdp, cond)
    observed, unconfirmed = _observed_j_infinity(mdp, horizon, window)
    if j_infinity is None:
        j_infinity = ValueFn(observed)
        tol = max(tol, AGREEMENT_TOLERANCE)
    elif len(j_infinity) != mdp.n_states:
        raise PreconditionViolated(
            f"J_inf has {len(j_infinity)} entries, model has {mdp.n_states}"
        )
    backed_up = apply_array(OperatorKind.T, mdp, j_infinity.values)
    gap = distance(backed_up, j_infinity.values)
    if gap > tol:
        raise NotAFixedPoint(f"T(J_inf) differs from J_inf by {gap:.6g} on {mdp.name}")
    confirmed = np.ones(mdp.n_states, dtype=bool)
    confirmed[list(unconfirmed)] = False
    gaps = np.abs(extended_difference(j_infinity.values, observed))
    mismatch = confirmed & (gaps > AGREEMENT_TOLERANCE)
    if mismatch.any():
        labels = ", ".join(repr(mdp.state_ids[s]) for s in np.flatnonzero(mismatch))
        raise PreconditionViolated(f"J_inf is not limsup T^n(0) at {labels}")
    slack = _condition_slack(mdp, j_infinity.values, cond, j_star)
    if (slack < -SIGN_SLACK).any():
        raise _violated("fixed_point_bridging", mdp, cond, slack)

    sequences = _check_phi_sequences(mdp, cond, horizon)
    signs = classify_signs(mdp, sequences, horizon, window)
    if unconfirmed:
        logger.debug(
            "%s: limsup T^n(0) unconfirmed at %d states; nothing certified",
            mdp.name,
            len(unconfirmed),
        )
        uncertain = frozenset(range(mdp.n_states))
    else:
        uncertain = signs.heuristic
    certified = assign_certificates(
        mdp.n_states,
        signs.nonneg_liminf,
        signs.nonneg_limsup,
        Certificate.CONDITIONAL,
        uncertain,
        strong_certificate=Certificate.LIMSUP,
    )
    heuristic = signs.heuristic | unconfirmed
    witness = _witness(cond, mdp)
    witness["j_infinity"] = j_infinity.to_list()
    return PartialConvergenceReport(
        theorem="fixed_point_bridging",
        condition_holds=True,
        s_zero_plus=signs.nonneg_liminf,
        s_zero=signs.nonneg_limsup,
        certified=certified,
        horizon_used=signs.horizon_used,
        heuristic_flag=bool(heuristic),
        slack=slack,
        heuristic_states=heuristic,
        witness=witness,
    )
