"""Deterministic policy models."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Tuple

from gcmdp.models.value import encode_number

if TYPE_CHECKING:
    from gcmdp.models.mdp import Mdp


@dataclass(frozen=True)
class StationaryPolicy:
    """Represents a deterministic stationary policy.

    Attributes:
        choice: Action index per state
    """

    choice: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "choice", tuple(int(c) for c in self.choice))
        if any(c < 0 for c in self.choice):
            raise ValueError("action indices must be nonnegative")

    def __len__(self) -> int:
        return len(self.choice)

    def __getitem__(self, state: int) -> int:
        return self.choice[state]

    def check(self, mdp: "Mdp") -> None:
        """Verify the policy fits the model.

        Raises:
            ValueError: If the length or an action index does not fit
        """
        if len(self.choice) != mdp.n_states:
            raise ValueError(
                f"policy has {len(self.choice)} entries, model has {mdp.n_states} states"
            )
        for state, action in enumerate(self.choice):
            if action >= len(mdp.actions[state]):
                raise ValueError(
                    f"action index {action} out of range at state {mdp.state_ids[state]!r}"
                )

    def to_labels(self, mdp: "Mdp") -> Dict[str, str]:
        """Map each state label to the chosen action label."""
        self.check(mdp)
        return {
            mdp.state_ids[state]: mdp.actions[state][action].label
            for state, action in enumerate(self.choice)
        }

    @classmethod
    def from_labels(cls, mdp: "Mdp", labels: Dict[str, str]) -> "StationaryPolicy":
        """Inverse of to_labels.

        Raises:
            ValueError: If a state is missing or an action label is unknown
        """
        choice: List[int] = []
        for state, state_label in enumerate(mdp.state_ids):
            if state_label not in labels:
                raise ValueError(f"policy does not cover state {state_label!r}")
            wanted = labels[state_label]
            names = [a.label for a in mdp.actions[state]]
            if wanted not in names:
                raise ValueError(f"unknown action {wanted!r} at state {state_label!r}")
            choice.append(names.index(wanted))
        return cls(tuple(choice))

    @classmethod
    def first(cls, mdp: "Mdp") -> "StationaryPolicy":
        """The policy choosing action 0 everywhere."""
        return cls((0,) * mdp.n_states)


@dataclass(frozen=True)
class PartitionBlock:
    """One block A_k minus A_(k-1) of a semi-Markov policy.

    Starting in a block state, the policy applies stages[0], ..., stages[k-1]
    and then the tail policy forever.

    Attributes:
        states: State indices of the block
        k: Number of finite-horizon stages
        stages: One stationary map per stage
        tail: Policy used after the k stages
    """

    states: Tuple[int, ...]
    k: int
    stages: Tuple[StationaryPolicy, ...]
    tail: StationaryPolicy

    def __post_init__(self):
        if len(self.stages) != self.k:
            raise ValueError(f"block with k={self.k} has {len(self.stages)} stages")


@dataclass(frozen=True)
class SemiMarkovPolicy:
    """Nonrandomized semi-Markov policy given by a partition of start states.

    Attributes:
        partition: Blocks with disjoint state sets covering every state
    """

    partition: Tuple[PartitionBlock, ...]

    def check(self, mdp: "Mdp") -> None:
        """Verify disjointness and coverage of the partition.

        Raises:
            ValueError: If the blocks overlap or miss a state
        """
        seen: Dict[int, int] = {}
        for block in self.partition:
            for state in block.states:
                if state in seen:
                    raise ValueError(f"state {mdp.state_ids[state]!r} in two blocks")
                seen[state] = block.k
            for stage in block.stages:
                stage.check(mdp)
            block.tail.check(mdp)
        missing = [mdp.state_ids[s] for s in range(mdp.n_states) if s not in seen]
        if missing:
            raise ValueError(f"partition misses states {missing}")

    def block_of(self, state: int) -> PartitionBlock:
        """Block whose state set contains state.

        Raises:
            KeyError: If no block contains it
        """
        for block in self.partition:
            if state in block.states:
                return block
        raise KeyError(state)

    def to_dict(self, mdp: "Mdp") -> Dict[str, object]:
        """Serialize with state and action labels."""
        return {
            "partition": [
                {
                    "states": [mdp.state_ids[s] for s in block.states],
                    "k": block.k,
                    "stages": [stage.to_labels(mdp) for stage in block.stages],
                    "tail": block.tail.to_labels(mdp),
                }
                for block in self.partition
            ]
        }


@dataclass
class NoOptimalCertificate:
    """Negative result of greedy optimal policy extraction.

    Attributes:
        states: States where the greedy policy misses J*
        reason: Explanation
        gaps: Per listed state, J_mu - J*
    """

    states: List[int]
    reason: str
    gaps: Dict[int, float] = field(default_factory=dict)

    def to_dict(self, mdp: "Mdp") -> Dict[str, object]:
        """Serialize with state labels."""
        return {
            "certificate": "no_optimal_stationary",
            "reason": self.reason,
            "states": [mdp.state_ids[s] for s in self.states],
            "gaps": {mdp.state_ids[s]: encode_number(gap) for s, gap in self.gaps.items()},
        }

