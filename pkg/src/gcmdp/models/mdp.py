"""Finite MDP model with signed one-stage costs."""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

Transition = Tuple[int, float]


@dataclass(frozen=True)
class Action:
    """Represents a control available at a state.

    Attributes:
        label: Opaque action label
        cost: One-stage cost g(x, u), a finite real
        transitions: (target state index, probability) pairs
    """

    label: str
    cost: float
    transitions: Tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, "cost", float(self.cost))
        object.__setattr__(
            self,
            "transitions",
            tuple((int(target), float(p)) for target, p in self.transitions),
        )

    @property
    def cost_pos(self) -> float:
        """Positive part g+ = max(g, 0)."""
        return max(self.cost, 0.0)

    @property
    def cost_neg(self) -> float:
        """Negative part g- = max(-g, 0)."""
        return max(-self.cost, 0.0)

    @property
    def successors(self) -> Tuple[int, ...]:
        """Target states reached with positive probability."""
        return tuple(target for target, p in self.transitions if p > 0)


class Mdp:
    """Finite controlled Markov chain with signed costs and discount.

    The model is immutable after construction. Arrays used by the operators
    are compiled lazily on first use.

    Attributes:
        _name: Model name
        _state_ids: Ordered state labels; the position is the StateId
        _actions: Per state, the ordered tuple of actions
        _discount: Discount factor in (0, 1]
        _boundary: States given a synthetic absorbing action by slicing
        _exact_horizon: Per-state number of backups that are exact for the
            model this one was sliced from (None for ordinary finite models)
        _root: Start state of a slice, if any
    """

    def __init__(
        self,
        state_ids: Sequence[str],
        actions: Sequence[Sequence[Action]],
        discount: float = 1.0,
        name: str = "mdp",
        boundary: Iterable[int] = (),
        exact_horizon: Optional[Sequence[float]] = None,
        root: Optional[int] = None,
    ):
        """Initialize a model.

        The constructor does not validate; use ``validate`` or load through
        ``load_mdp``.

        Args:
            state_ids: Ordered state labels
            actions: One sequence of actions per state
            discount: Discount factor in (0, 1]
            name: Model name
            boundary: Indices of synthetic boundary states
            exact_horizon: Optional per-state exactness horizon
            root: Optional root state index of a slice
        """
        if len(state_ids) != len(actions):
            raise ValueError("state_ids and actions must have the same length")
        self._name = name
        self._state_ids: Tuple[str, ...] = tuple(str(s) for s in state_ids)
        self._actions: Tuple[Tuple[Action, ...], ...] = tuple(
            tuple(per_state) for per_state in actions
        )
        self._discount = float(discount)
        self._boundary: FrozenSet[int] = frozenset(int(b) for b in boundary)
        if exact_horizon is None:
            self._exact_horizon = None
        else:
            horizon = np.array(exact_horizon, dtype=float)
            horizon.setflags(write=False)
            self._exact_horizon = horizon
        self._root = root

    @property
    def name(self) -> str:
        """Get the model name."""
        return self._name

    @property
    def state_ids(self) -> Tuple[str, ...]:
        """Get the ordered state labels."""
        return self._state_ids

    @property
    def actions(self) -> Tuple[Tuple[Action, ...], ...]:
        """Get the per-state action tuples."""
        return self._actions

    @property
    def discount(self) -> float:
        """Get the discount factor."""
        return self._discount

    @property
    def is_discounted(self) -> bool:
        """True for the discounted (UD) model."""
        return self._discount < 1.0

    @property
    def boundary(self) -> FrozenSet[int]:
        """Get the synthetic boundary states."""
        return self._boundary

    @property
    def exact_horizon(self) -> Optional[np.ndarray]:
        """Get the per-state exactness horizon, or None."""
        return self._exact_horizon

    @property
    def root(self) -> Optional[int]:
        """Get the slice root state, or None."""
        return self._root

    @property
    def n_states(self) -> int:
        """Number of states."""
        return len(self._state_ids)

    @property
    def n_pairs(self) -> int:
        """Total number of state-action pairs."""
        return sum(len(a) for a in self._actions)

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self._state_ids)}

    def index_of(self, label: str) -> int:
        """Get the StateId of a label.

        Raises:
            KeyError: If the label is unknown
        """
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown state {label!r}")

    def action_counts(self) -> List[int]:
        """Number of actions per state."""
        return [len(a) for a in self._actions]

    def successors(self, state: int) -> List[int]:
        """Distinct successors of a state over all its actions."""
        seen: Dict[int, None] = {}
        for action in self._actions[state]:
            for target in action.successors:
                seen[target] = None
        return list(seen)

    # Compiled arrays. Pairs are numbered state by state, action by action.

    @cached_property
    def pair_offsets(self) -> np.ndarray:
        """Index of the first pair of each state (for reduceat)."""
        counts = np.array(self.action_counts(), dtype=np.int64)
        offsets = np.zeros(self.n_states, dtype=np.int64)
        if self.n_states > 1:
            offsets[1:] = np.cumsum(counts)[:-1]
        return offsets

    @cached_property
    def pair_state(self) -> np.ndarray:
        """Owner state of each pair."""
        return np.repeat(
            np.arange(self.n_states, dtype=np.int64),
            np.array(self.action_counts(), dtype=np.int64),
        )

    @cached_property
    def costs(self) -> np.ndarray:
        """One-stage cost of each pair."""
        return np.array([a.cost for per in self._actions for a in per], dtype=float)

    @cached_property
    def costs_pos(self) -> np.ndarray:
        """Positive cost part of each pair."""
        return np.maximum(self.costs, 0.0)

    @cached_property
    def costs_neg(self) -> np.ndarray:
        """Negative cost part of each pair."""
        return np.maximum(-self.costs, 0.0)

    @cached_property
    def transition_matrix(self) -> sparse.csr_matrix:
        """Pair-by-state transition matrix; zero probabilities are not stored."""
        rows: List[int] = []
        cols: List[int] = []
        data: List[float] = []
        pair = 0
        for per_state in self._actions:
            for action in per_state:
                for target, probability in action.transitions:
                    if probability > 0:
                        rows.append(pair)
                        cols.append(target)
                        data.append(probability)
                pair += 1
        matrix = sparse.csr_matrix(
            (data, (rows, cols)), shape=(self.n_pairs, self.n_states), dtype=float
        )
        matrix.sum_duplicates()
        return matrix

    def pair_index(self, state: int, action: int) -> int:
        """Global pair number of (state, action)."""
        return int(self.pair_offsets[state]) + action

    def policy_matrix(self, choice: Sequence[int]) -> sparse.csr_matrix:
        """State-by-state transition matrix of a stationary selection."""
        rows = self.pair_offsets + np.asarray(choice, dtype=np.int64)
        return self.transition_matrix[rows]

    def policy_costs(self, choice: Sequence[int], which: str = "cost") -> np.ndarray:
        """Per-state cost of a stationary selection.

        Args:
            choice: Action index per state
            which: "cost", "pos" or "neg"
        """
        source = {"cost": self.costs, "pos": self.costs_pos, "neg": self.costs_neg}[which]
        return source[self.pair_offsets + np.asarray(choice, dtype=np.int64)]

    def __repr__(self) -> str:
        return (
            f"Mdp(name={self._name!r}, n_states={self.n_states}, "
            f"n_pairs={self.n_pairs}, discount={self._discount})"
        )
