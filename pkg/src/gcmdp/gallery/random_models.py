"""Seeded random models satisfying the GC condition.

The generator uses a 64-bit splitmix sequence and takes every structural
decision from integers, so a seed yields the same model on every platform.
Costs are quarter-integers and probabilities are ratios of small integers.
"""

import logging
from typing import List

from gcmdp.analysis.graph import decompose_end_components
from gcmdp.models.mdp import Action, Mdp

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 generator: state += golden gamma, then two xor-shift-multiply rounds."""

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next(self) -> int:
        """Next 64-bit output."""
        self._state = (self._state + self.GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Integer in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next() % bound

    def unit(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next() >> 11) * (1.0 / (1 << 53))


def generate_random_gc(
    seed: int,
    n_states: int,
    n_actions: int,
    discount: float = 1.0,
    sign_mix: float = 0.5,
    max_successors: int = 3,
) -> Mdp:
    """Generate a random finite model that satisfies GC.

    Each state gets between 1 and n_actions actions. Each action has between
    1 and max_successors distinct targets with integer weights 1..8, a cost
    that is 0 with probability 1/8 and otherwise a multiple of 1/4 in
    [1, 4.75] in magnitude, negative with probability sign_mix. For
    undiscounted models, negative costs of pairs inside a maximal end
    component are set to 0.

    Args:
        seed: Generator seed
        n_states: Number of states, at least 1
        n_actions: Largest number of actions per state, at least 1
        discount: Discount factor in (0, 1]
        sign_mix: Probability of a negative nonzero cost
        max_successors: Largest number of targets per action

    Returns:
        The model, named "random_<seed>"
    """
    if n_states < 1 or n_actions < 1 or max_successors < 1:
        raise ValueError("n_states, n_actions and max_successors must be at least 1")
    if not 0.0 <= sign_mix <= 1.0:
        raise ValueError(f"sign_mix must lie in [0, 1], got {sign_mix}")
    if not 0.0 < discount <= 1.0:
        raise ValueError(f"discount must lie in (0, 1], got {discount}")

    rng = SplitMix64(seed)
    actions: List[List[Action]] = []
    for _ in range(n_states):
        per_state = []
        for a in range(1 + rng.below(n_actions)):
            k = 1 + rng.below(min(max_successors, n_states))
            pool = list(range(n_states))
            # Partial Fisher-Yates: the first k entries are the targets.
            for i in range(k):
                j = i + rng.below(n_states - i)
                pool[i], pool[j] = pool[j], pool[i]
            weights = [1 + rng.below(8) for _ in range(k)]
            total = sum(weights)
            transitions = tuple((pool[i], weights[i] / total) for i in range(k))
            if rng.below(8) == 0:
                cost = 0.0
            else:
                magnitude = 1.0 + rng.below(16) / 4.0
                cost = -magnitude if rng.unit() < sign_mix else magnitude
            per_state.append(Action(f"a{a}", cost, transitions))
        actions.append(per_state)

    mdp = Mdp([f"s{i}" for i in range(n_states)], actions, discount, name=f"random_{seed}")
    if mdp.is_discounted:
        return mdp

    repaired = 0
    for component in decompose_end_components(mdp).components:
        for state, inside in component.actions.items():
            for a in inside:
                action = actions[state][a]
                if action.cost < 0:
                    actions[state][a] = Action(action.label, 0.0, action.transitions)
                    repaired += 1
    if repaired:
        logger.debug("random_%d: %d negative pairs inside end components set to 0", seed, repaired)
        mdp = Mdp(mdp.state_ids, actions, discount, name=mdp.name)
    return mdp
