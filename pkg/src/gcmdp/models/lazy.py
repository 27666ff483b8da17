"""Lazily generated countable MDPs and their finite horizon slices."""

import heapq
import logging
import math
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from gcmdp.config import DEFAULT_EXPANSION_CAP, resolve_cap
from gcmdp.errors import ExpansionBudgetExceeded, PreconditionViolated
from gcmdp.models.mdp import Action, Mdp

logger = logging.getLogger(__name__)

BOUNDARY_ACTION = "boundary"


@dataclass(frozen=True)
class LazyAction:
    """Action whose transitions reference states by label.

    Attributes:
        label: Action label
        cost: One-stage cost
        transitions: (target label, probability) pairs
    """

    label: str
    cost: float
    transitions: Tuple[Tuple[str, float], ...]


@dataclass(frozen=True)
class Expansion:
    """Result of expanding one state.

    Attributes:
        actions: The actions of the state
        exact_for: None when the action set is complete; otherwise the number
            of backups for which the truncated action set gives exact values
    """

    actions: Tuple[LazyAction, ...]
    exact_for: Optional[int] = None


class LazyMdp:
    """Countable MDP generated on demand from a set of root states.

    Expansions are cached, so expanding the same label twice returns the
    identical object. Materialization is serialized by an internal lock.

    Attributes:
        _root_states: Seed state labels
        _expand: Callback label -> Expansion
        _horizon_bound: Largest horizon a slice may be taken at
        _discount: Discount factor shared by all slices
        _name: Model name
    """

    def __init__(
        self,
        root_states: Sequence[str],
        expand: Callable[[str], Expansion],
        horizon_bound: int,
        discount: float = 1.0,
        name: str = "lazy",
    ):
        """Initialize a lazy model.

        Args:
            root_states: Seed state labels
            expand: Deterministic expansion callback
            horizon_bound: Largest horizon a slice may be taken at
            discount: Discount factor in (0, 1]
            name: Model name
        """
        if not root_states:
            raise ValueError("a lazy model needs at least one root state")
        if horizon_bound < 0:
            raise ValueError("horizon_bound must be nonnegative")
        self._root_states = tuple(root_states)
        self._expand = expand
        self._horizon_bound = int(horizon_bound)
        self._discount = float(discount)
        self._name = name
        self._cache: Dict[str, Expansion] = {}
        self._lock = threading.RLock()

    @property
    def root_states(self) -> Tuple[str, ...]:
        """Get the seed state labels."""
        return self._root_states

    @property
    def horizon_bound(self) -> int:
        """Get the largest admissible slice horizon."""
        return self._horizon_bound

    @property
    def discount(self) -> float:
        """Get the discount factor."""
        return self._discount

    @property
    def name(self) -> str:
        """Get the model name."""
        return self._name

    @property
    def lock(self) -> threading.RLock:
        """Lock serializing expansion and materialization."""
        return self._lock

    def expand(self, label: str) -> Expansion:
        """Expand a state, caching the result.

        Args:
            label: State label

        Returns:
            The expansion of the state
        """
        with self._lock:
            expansion = self._cache.get(label)
            if expansion is None:
                expansion = self._expand(label)
                self._cache[label] = expansion
            return expansion

    def slice(
        self, start: Union[str, int, None] = None, horizon: Optional[int] = None
    ) -> Mdp:
        """Materialize a slice rooted at start (default: first root)."""
        return materialize_horizon(
            self,
            self._root_states[0] if start is None else start,
            self._horizon_bound if horizon is None else horizon,
        )

    def __repr__(self) -> str:
        return (
            f"LazyMdp(name={self._name!r}, roots={list(self._root_states)}, "
            f"horizon_bound={self._horizon_bound})"
        )


def _is_closed(label: str, expansion: Expansion) -> bool:
    return all(
        target == label
        for action in expansion.actions
        for target, p in action.transitions
        if p > 0
    )


def materialize_horizon(
    lazy: LazyMdp,
    start: Union[str, int],
    horizon: int,
    cap: Optional[int] = None,
) -> Mdp:
    """Build the finite slice of states reachable from start within horizon steps.

    States of a lazy model are identified by label until they are
    materialized. An integer start is an index into lazy.root_states, the only
    states with a position before materialization; the slice root is state 0.

    States at depth == horizon become boundary states with a synthetic
    zero-cost self-loop, unless their real expansion only loops back to
    themselves, in which case the real actions are kept. Every state gets an
    exactness horizon: the number of backups for which values on the slice
    equal those of the countable model.

    Args:
        lazy: The lazy model
        start: Root label of the slice, or the index of one of the root states
        horizon: Expansion depth
        cap: Largest number of materialized states (default from config)

    Returns:
        A finite Mdp whose root is state 0

    Raises:
        PreconditionViolated: If horizon exceeds lazy.horizon_bound
        IndexError: If an integer start is not a root state index
        ExpansionBudgetExceeded: If more than cap states are materialized
    """
    if horizon < 0 or horizon > lazy.horizon_bound:
        raise PreconditionViolated(
            f"horizon {horizon} outside [0, {lazy.horizon_bound}] for {lazy.name}"
        )
    if cap is None:
        cap = resolve_cap(DEFAULT_EXPANSION_CAP)
    if not isinstance(start, str):
        if not 0 <= start < len(lazy.root_states):
            raise IndexError(f"{lazy.name} has no root state {start}")
        start = lazy.root_states[start]

    with lazy.lock:
        index: Dict[str, int] = {start: 0}
        labels: List[str] = [start]
        depth: List[int] = [0]
        expansions: List[Expansion] = []
        queue = deque([start])

        while queue:
            label = queue.popleft()
            state = index[label]
            expansion = lazy.expand(label)
            expansions.append(expansion)
            if depth[state] >= horizon:
                continue
            for action in expansion.actions:
                for target, p in action.transitions:
                    if p <= 0 or target in index:
                        continue
                    if len(labels) >= cap:
                        raise ExpansionBudgetExceeded(
                            f"slice of {lazy.name} at {start!r} exceeds {cap} states"
                        )
                    index[target] = len(labels)
                    labels.append(target)
                    depth.append(depth[state] + 1)
                    queue.append(target)

    actions: List[List[Action]] = []
    boundary: List[int] = []
    own: List[float] = []
    for state, (label, expansion) in enumerate(zip(labels, expansions)):
        if depth[state] >= horizon and not _is_closed(label, expansion):
            boundary.append(state)
            actions.append([Action(BOUNDARY_ACTION, 0.0, ((state, 1.0),))])
            own.append(0.0)
            continue
        actions.append(
            [
                Action(
                    a.label,
                    a.cost,
                    tuple((index[target], p) for target, p in a.transitions if p > 0),
                )
                for a in expansion.actions
            ]
        )
        own.append(math.inf if expansion.exact_for is None else float(expansion.exact_for))

    exact = _exact_horizons(actions, own)
    logger.debug(
        "materialized %s at %r: %d states, %d boundary, root exact for %s backups",
        lazy.name,
        start,
        len(labels),
        len(boundary),
        exact[0],
    )
    return Mdp(
        labels,
        actions,
        discount=lazy.discount,
        name=f"{lazy.name}[{start}:{horizon}]",
        boundary=boundary,
        exact_horizon=exact,
        root=0,
    )


def _exact_horizons(actions: List[List[Action]], own: List[float]) -> List[float]:
    """Solve E(x) = min(own(x), 1 + min over successors E(y)) by Dijkstra on reversed edges."""
    n = len(actions)
    predecessors: List[List[int]] = [[] for _ in range(n)]
    for state, per_state in enumerate(actions):
        for action in per_state:
            for target in action.successors:
                if target != state:
                    predecessors[target].append(state)

    exact = list(own)
    heap = [(value, state) for state, value in enumerate(exact) if math.isfinite(value)]
    heapq.heapify(heap)
    while heap:
        value, state = heapq.heappop(heap)
        if value > exact[state]:
            continue
        for pred in predecessors[state]:
            if value + 1 < exact[pred]:
                exact[pred] = value + 1
                heapq.heappush(heap, (value + 1, pred))
    return exact
