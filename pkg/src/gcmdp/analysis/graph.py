"""Graph algorithms on the state-action structure of an MDP.

All routines take an optional boolean ``pair_mask`` over state-action pairs;
masked-out pairs are treated as if the action did not exist.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from gcmdp.models.mdp import Mdp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EndComponent:
    """A sub-MDP closed under its actions and strongly connected.

    Attributes:
        states: State indices, ascending
        actions: Per state, the action indices staying inside the component
    """

    states: Tuple[int, ...]
    actions: Dict[int, Tuple[int, ...]]


@dataclass
class EndComponentDecomposition:
    """Maximal end components of a model.

    Attributes:
        components: Pairwise disjoint components ordered by smallest state
    """

    components: List[EndComponent] = field(default_factory=list)

    def state_mask(self, n_states: int) -> np.ndarray:
        """Boolean mask of states lying in some component."""
        mask = np.zeros(n_states, dtype=bool)
        for component in self.components:
            mask[list(component.states)] = True
        return mask

    def pair_mask(self, mdp: Mdp) -> np.ndarray:
        """Boolean mask of pairs lying in some component."""
        mask = np.zeros(mdp.n_pairs, dtype=bool)
        for component in self.components:
            for state, actions in component.actions.items():
                for action in actions:
                    mask[mdp.pair_index(state, action)] = True
        return mask


def pair_rows(mdp: Mdp) -> np.ndarray:
    """Pair number of every stored entry of the transition matrix."""
    matrix = mdp.transition_matrix
    return np.repeat(np.arange(mdp.n_pairs), np.diff(matrix.indptr))


def _full_mask(mdp: Mdp, pair_mask: Optional[np.ndarray]) -> np.ndarray:
    if pair_mask is None:
        return np.ones(mdp.n_pairs, dtype=bool)
    return np.asarray(pair_mask, dtype=bool)


def state_adjacency(mdp: Mdp, pair_mask: Optional[np.ndarray] = None) -> sparse.csr_matrix:
    """State-by-state adjacency using the allowed pairs."""
    allowed = _full_mask(mdp, pair_mask)
    matrix = mdp.transition_matrix
    rows = pair_rows(mdp)
    keep = allowed[rows]
    data = np.ones(int(keep.sum()), dtype=np.int8)
    adjacency = sparse.csr_matrix(
        (data, (mdp.pair_state[rows[keep]], matrix.indices[keep])),
        shape=(mdp.n_states, mdp.n_states),
    )
    adjacency.sum_duplicates()
    return adjacency


def strong_components(adjacency: sparse.spmatrix) -> np.ndarray:
    """Label every node with the id of its strongly connected component."""
    _, labels = csgraph.connected_components(adjacency, directed=True, connection="strong")
    return labels


def can_reach(adjacency: sparse.spmatrix, targets: np.ndarray) -> np.ndarray:
    """Nodes with a path (possibly empty) into the target set."""
    targets = np.asarray(targets, dtype=bool)
    n = adjacency.shape[0]
    if not targets.any():
        return np.zeros(n, dtype=bool)
    # Reverse the graph and hang every target below one extra source node.
    coo = sparse.coo_matrix(adjacency)
    sources = np.flatnonzero(targets)
    rows = np.concatenate([coo.col, np.full(len(sources), n)])
    cols = np.concatenate([coo.row, sources])
    extended = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n + 1, n + 1)
    )
    order = csgraph.breadth_first_order(extended, n, directed=True, return_predecessors=False)
    mask = np.zeros(n + 1, dtype=bool)
    mask[order] = True
    return mask[:n]


def closed_classes(adjacency: sparse.spmatrix) -> np.ndarray:
    """Component labels, with -1 for nodes outside closed (bottom) components."""
    labels = strong_components(adjacency)
    coo = sparse.coo_matrix(adjacency)
    leaving = labels[coo.row] != labels[coo.col]
    open_labels = np.unique(labels[coo.row[leaving]])
    result = labels.copy()
    result[np.isin(labels, open_labels)] = -1
    return result


def decompose_end_components(
    mdp: Mdp, pair_mask: Optional[np.ndarray] = None
) -> EndComponentDecomposition:
    """Compute the maximal end components.

    Repeatedly splits the graph of the allowed pairs into strongly connected
    components and removes every pair with a successor outside the component
    of its state, until nothing changes.

    Args:
        mdp: A validated finite model
        pair_mask: Optional restriction to a subset of pairs

    Returns:
        The decomposition
    """
    allowed = _full_mask(mdp, pair_mask).copy()
    rows = pair_rows(mdp)
    targets = mdp.transition_matrix.indices

    while True:
        labels = strong_components(state_adjacency(mdp, allowed))
        leaves = labels[targets] != labels[mdp.pair_state[rows]]
        bad = np.bincount(rows[leaves], minlength=mdp.n_pairs) > 0
        removed = allowed & bad
        if not removed.any():
            break
        allowed &= ~bad

    groups: Dict[int, Dict[int, List[int]]] = {}
    for pair in np.flatnonzero(allowed):
        state = int(mdp.pair_state[pair])
        action = int(pair - mdp.pair_offsets[state])
        groups.setdefault(int(labels[state]), {}).setdefault(state, []).append(action)

    components = [
        EndComponent(
            states=tuple(sorted(per_state)),
            actions={s: tuple(a) for s, a in sorted(per_state.items())},
        )
        for per_state in groups.values()
    ]
    components.sort(key=lambda c: c.states[0])
    logger.debug("%s: %d maximal end components", mdp.name, len(components))
    return EndComponentDecomposition(components)


def almost_sure_reach(
    mdp: Mdp, targets: np.ndarray, pair_mask: Optional[np.ndarray] = None
) -> np.ndarray:
    """States from which some policy reaches the targets with probability one.

    Args:
        mdp: A validated finite model
        targets: Boolean mask of target states
        pair_mask: Optional restriction to a subset of pairs

    Returns:
        Boolean state mask
    """
    allowed = _full_mask(mdp, pair_mask)
    targets = np.asarray(targets, dtype=bool)
    matrix = mdp.transition_matrix
    rows = pair_rows(mdp)

    def pairs_with_successor_in(mask: np.ndarray) -> np.ndarray:
        return np.bincount(rows[mask[matrix.indices]], minlength=mdp.n_pairs) > 0

    def owners(pairs: np.ndarray) -> np.ndarray:
        result = np.zeros(mdp.n_states, dtype=bool)
        result[mdp.pair_state[pairs]] = True
        return result

    keep = np.ones(mdp.n_states, dtype=bool)
    while True:
        stays = allowed & ~pairs_with_successor_in(~keep)
        reach = targets & keep
        while True:
            grown = reach | (keep & owners(stays & pairs_with_successor_in(reach)))
            if np.array_equal(grown, reach):
                break
            reach = grown
        if np.array_equal(reach, keep):
            return keep
        keep = reach
