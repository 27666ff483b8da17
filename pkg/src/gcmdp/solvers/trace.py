"""Convergence traces, cycle detection and the generic iteration loop."""

import logging
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Deque, Dict, List, Optional, Tuple

import numpy as np

from gcmdp.config import CYCLE_TOLERANCE, DEFAULT_TOLERANCE, DEFAULT_WINDOW
from gcmdp.models.mdp import Mdp
from gcmdp.models.value import ValueFn, distance, encode_number

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    """Classification of an iterate sequence."""

    CONVERGED = "converged"
    OSCILLATING = "oscillating"
    CAP_REACHED = "cap_reached"


@dataclass
class ConvergenceTrace:
    """Iterates of a fixed point iteration and their classification.

    Attributes:
        iterates: Kept iterates (every k-th plus the final window)
        indices: Iteration number of each kept iterate
        regime: converged, oscillating or cap_reached
        iterations_used: Number of backups performed before the verdict
        limit: The limit when converged
        liminf: Per-state liminf over the detected cycle (or the window)
        limsup: Per-state limsup over the detected cycle (or the window)
        period: Cycle period when one was detected
        heuristic: True when liminf/limsup come from a window, not a cycle
        watch: State whose sequence drives the classification, if any
    """

    iterates: List[ValueFn]
    indices: List[int]
    regime: Regime
    iterations_used: int
    limit: Optional[ValueFn] = None
    liminf: Optional[ValueFn] = None
    limsup: Optional[ValueFn] = None
    period: Optional[int] = None
    heuristic: bool = False
    watch: Optional[int] = None

    @property
    def last(self) -> ValueFn:
        """The final iterate."""
        return self.iterates[-1]

    def summary(self, mdp: Mdp) -> Dict[str, Any]:
        """JSON-ready summary keyed by state labels."""

        def labelled(fn: Optional[ValueFn]) -> Optional[Dict[str, Any]]:
            if fn is None:
                return None
            return {label: encode_number(v) for label, v in zip(mdp.state_ids, fn.values)}

        return {
            "regime": self.regime.value,
            "iterations": self.iterations_used,
            "period": self.period,
            "heuristic": self.heuristic,
            "watch": None if self.watch is None else mdp.state_ids[self.watch],
            "limit": labelled(self.limit),
            "liminf": labelled(self.liminf),
            "limsup": labelled(self.limsup),
        }


@dataclass(frozen=True)
class SequenceBounds:
    """liminf/limsup estimate of one sequence.

    Attributes:
        liminf: Smallest value over the detected cycle (or window)
        limsup: Largest value over the detected cycle (or window)
        period: Cycle period, or None when no cycle was found
        length: Number of sequence terms examined
    """

    liminf: float
    limsup: float
    period: Optional[int]
    length: int

    @property
    def heuristic(self) -> bool:
        return self.period is None


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    both_inf = np.isinf(a) & np.isinf(b)
    with np.errstate(invalid="ignore"):
        near = np.abs(a - b) <= tol
    return both_inf | (near & np.isfinite(a) & np.isfinite(b))


def detect_cycle(window: np.ndarray, tol: float = CYCLE_TOLERANCE) -> Optional[int]:
    """Smallest period p with which the tail of a window repeats.

    The window (rows = consecutive terms) has a cycle of period p when its
    last max(2p, ceil(L/2)) rows repeat with period p within tol. Period 1
    means the tail is constant.

    Args:
        window: Array of shape (L,) or (L, m)
        tol: Per-entry tolerance

    Returns:
        The minimal period, or None
    """
    window = np.asarray(window, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    length = window.shape[0]
    half = math.ceil(length / 2)
    for period in range(1, length // 2 + 1):
        span = max(2 * period, half)
        tail = window[length - span :]
        if _close(tail[period:], tail[:-period], tol).all():
            return period
    return None


def sequence_bounds(
    sequence: np.ndarray, window: int = DEFAULT_WINDOW, tol: float = CYCLE_TOLERANCE
) -> SequenceBounds:
    """Estimate liminf and limsup of a scalar sequence from its trailing window."""
    sequence = np.asarray(sequence, dtype=float)
    if sequence.size == 0:
        raise ValueError("cannot bound an empty sequence")
    trailing = sequence[-window:]
    period = detect_cycle(trailing, tol)
    cycle = trailing[-period:] if period else trailing
    return SequenceBounds(float(cycle.min()), float(cycle.max()), period, int(sequence.size))


def run_iteration(
    step: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    max_iter: int,
    tol: float = DEFAULT_TOLERANCE,
    window: int = DEFAULT_WINDOW,
    keep_every: int = 1,
    watch: Optional[int] = None,
    label: str = "iteration",
) -> ConvergenceTrace:
    """Iterate a map and classify the resulting sequence.

    Converged at n means the step from J_n to J_(n+1) moved every
    entry by less than tol with the same +inf pattern; the limit is then
    J_(n+1). Every `window` steps (and at the end) the trailing window is
    searched for a cycle, which ends the run. A watched state (the root of a
    slice) drives the cycle search, which then runs only on the final window.

    Args:
        step: The map J -> J'
        start: Initial function
        max_iter: Largest number of steps
        tol: Convergence tolerance
        window: Trailing window width W for cycle detection
        keep_every: Keep every k-th iterate in addition to the final window
        watch: Observe only this state
        label: Name used in log messages

    Returns:
        The trace
    """
    values = np.asarray(start, dtype=float)
    recent: Deque[Tuple[int, np.ndarray]] = deque([(0, values)], maxlen=window)
    kept: Dict[int, np.ndarray] = {0: values}

    def observe(v: np.ndarray) -> np.ndarray:
        return v if watch is None else v[[watch]]

    def finish(
        regime: Regime,
        used: int,
        limit: Optional[np.ndarray] = None,
        period: Optional[int] = None,
    ) -> ConvergenceTrace:
        for index, iterate in recent:
            kept[index] = iterate
        order = sorted(kept)
        stacked = np.array([it for _, it in recent])
        cycle = stacked[-period:] if period else stacked
        trace = ConvergenceTrace(
            iterates=[ValueFn(kept[i]) for i in order],
            indices=order,
            regime=regime,
            iterations_used=used,
            limit=None if limit is None else ValueFn(limit),
            liminf=ValueFn(cycle.min(axis=0)),
            limsup=ValueFn(cycle.max(axis=0)),
            period=period,
            heuristic=regime is Regime.CAP_REACHED,
            watch=watch,
        )
        logger.debug(
            "%s: %s after %d steps (period %s)", label, regime.value, used, period
        )
        return trace

    def window_period() -> Optional[int]:
        return detect_cycle(np.array([observe(it) for _, it in recent]))

    for n in range(max_iter):
        updated = np.asarray(step(values), dtype=float)
        recent.append((n + 1, updated))
        if (n + 1) % keep_every == 0:
            kept[n + 1] = updated
        if distance(updated, values) < tol:
            return finish(Regime.CONVERGED, n, updated, 1)
        values = updated
        if watch is None and (n + 1) % window == 0:
            period = window_period()
            if period is not None and period > 1:
                return finish(Regime.OSCILLATING, n + 1, None, period)

    period = window_period()
    if period == 1:
        return finish(Regime.CONVERGED, max_iter, recent[-1][1], 1)
    if period is not None:
        return finish(Regime.OSCILLATING, max_iter, None, period)
    logger.info("%s: no convergence or cycle within %d steps", label, max_iter)
    return finish(Regime.CAP_REACHED, max_iter)
