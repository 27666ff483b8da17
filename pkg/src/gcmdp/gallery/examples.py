"""Built-in example models with their known values.

Each entry pairs a model with expectations: a named quantity, how to compute
it from the model, the value it must take and where that value comes from.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

from gcmdp.conditions.bridging import check_bridging
from gcmdp.conditions.reports import BridgingCondition
from gcmdp.conditions.tails import check_van_hee
from gcmdp.models.lazy import Expansion, LazyAction, LazyMdp
from gcmdp.models.mdp import Action, Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.value import ValueFn
from gcmdp.operators import OperatorKind, apply, apply_n
from gcmdp.solvers.value_iteration import (
    compute_j_star_minus,
    compute_j_star_plus,
    solve_from_above,
    vi_from,
    vi_tilde,
)

EXACT = 1e-12


@dataclass(frozen=True)
class Expectation:
    """One known value of a gallery model.

    Attributes:
        name: Short identifier
        compute: Function of the (materialized) model returning the actual value
        expected: The known value: a number, a string, a list of labels, a
            mapping state label -> number, or a function of the model giving one
        provenance: How the known value is obtained
        tolerance: Absolute tolerance for numeric comparisons
    """

    name: str
    compute: Callable[[Mdp], Any]
    expected: Any
    provenance: str
    tolerance: float = EXACT

    def expected_for(self, mdp: Mdp) -> Any:
        """The known value for a materialized model."""
        if callable(self.expected):
            return self.expected(mdp)
        return self.expected


@dataclass
class GalleryEntry:
    """A built-in model and its expectations.

    Attributes:
        id: Entry identifier
        model: A finite model or a lazily generated one
        expected: Expectations keyed by name
        description: One-line summary
    """

    id: str
    model: Union[Mdp, LazyMdp]
    expected: Dict[str, Expectation] = field(default_factory=dict)
    description: str = ""

    def add(self, expectation: Expectation) -> None:
        """Register an expectation."""
        self.expected[expectation.name] = expectation

    @property
    def is_lazy(self) -> bool:
        return isinstance(self.model, LazyMdp)

    def materialize(self, horizon: Optional[int] = None) -> Mdp:
        """The finite model, or the slice of the lazy model at its first root."""
        if isinstance(self.model, LazyMdp):
            return self.model.slice(horizon=horizon)
        return self.model


def _labelled(mdp: Mdp, values: ValueFn, labels: Optional[List[str]] = None) -> Dict[str, float]:
    if labels is None:
        labels = list(mdp.state_ids)
    return {label: float(values[mdp.index_of(label)]) for label in labels}


def _pair(i: int, j: int) -> str:
    return f"({i},{j})"


_PAIR = re.compile(r"^\((\d+),(\d+)\)$")


def parse_pair(label: str) -> tuple:
    """Inverse of the "(i,j)" labelling of the countable examples."""
    match = _PAIR.match(label)
    if not match:
        raise ValueError(f"not a pair label: {label!r}")
    return int(match.group(1)), int(match.group(2))


def _chain_table(mdp: Mdp, rule: Callable[[int, int], float]) -> Dict[str, float]:
    """Closed form value on every chain state (i > 0) of a slice."""
    table = {}
    for label in mdp.state_ids:
        i, j = parse_pair(label)
        if i > 0:
            table[label] = rule(i, j)
    return table


def _chain_expectation(
    name: str,
    solver: Callable[[Mdp], ValueFn],
    rule: Callable[[int, int], float],
    provenance: str,
) -> Expectation:
    return Expectation(
        name,
        lambda m: _labelled(m, solver(m), list(_chain_table(m, rule))),
        lambda m: _chain_table(m, rule),
        provenance,
    )


# -- three-state model ----------------------------------------------------


def example_4_1() -> GalleryEntry:
    """Three states: 0 absorbing and free, 1 -> 0 at cost 1, 2 may stay or move to 1 at cost -1.

    Every policy is optimal with J* = (0, 1, 0), but T(0) = (0, 1, -1) is
    already a fixed point of T, so value iteration from 0 converges to the
    wrong limit.
    """
    mdp = Mdp(
        ["0", "1", "2"],
        [
            [Action("stay", 0.0, ((0, 1.0),))],
            [Action("exit", 1.0, ((0, 1.0),))],
            [Action("stay", 0.0, ((2, 1.0),)), Action("move", -1.0, ((1, 1.0),))],
        ],
        name="example_4_1",
    )
    entry = GalleryEntry(
        "example_4_1",
        mdp,
        description="finite model where value iteration from 0 stops at a wrong fixed point",
    )
    entry.add(
        Expectation(
            "j_star",
            lambda m: _labelled(m, solve_from_above(m)[0]),
            {"0": 0.0, "1": 1.0, "2": 0.0},
            "staying at 2 forever costs 0; moving pays -1 then 1",
        )
    )
    entry.add(
        Expectation(
            "j_star_plus",
            lambda m: _labelled(m, compute_j_star_plus(m)),
            {"0": 0.0, "1": 1.0, "2": 0.0},
            "positive parts only: staying at 2 avoids the cost at 1",
        )
    )
    entry.add(
        Expectation(
            "j_star_minus",
            lambda m: _labelled(m, compute_j_star_minus(m)),
            {"0": 0.0, "1": 0.0, "2": 0.0},
            "negative parts are avoided by staying at 2",
        )
    )
    entry.add(
        Expectation(
            "vi0_regime",
            lambda m: vi_from(m, ValueFn.zeros(m.n_states)).regime.value,
            "converged",
            "T(0) is a fixed point of T",
        )
    )
    entry.add(
        Expectation(
            "j_infinity",
            lambda m: _labelled(m, vi_from(m, ValueFn.zeros(m.n_states)).limit),
            {"0": 0.0, "1": 1.0, "2": -1.0},
            "one backup from 0 gives (0, 1, -1), which T leaves unchanged",
        )
    )
    entry.add(
        Expectation(
            "vi_tilde_limit",
            lambda m: _labelled(m, vi_tilde(m).limit),
            {"0": 0.0, "1": 1.0, "2": 0.0},
            "max(0, T(0)) = (0, 1, 0) = J*",
        )
    )
    entry.add(
        Expectation(
            "vi_tilde_within_two",
            lambda m: vi_tilde(m).iterations_used <= 2,
            True,
            "the first increasing backup already lands on J*",
        )
    )
    for c in (1.0, 5.0):
        entry.add(
            Expectation(
                f"from_above_c{int(c)}",
                lambda m, c=c: _labelled(
                    m, apply(OperatorKind.T, m, ValueFn([0.0, c, 0.0])).value
                ),
                {"0": 0.0, "1": 1.0, "2": 0.0},
                "any start (0, c, 0) with c >= 1 lies above J* and one backup reaches J*",
            )
        )
    entry.add(
        Expectation(
            "bridging_s_zero_plus",
            lambda m: [
                m.state_ids[s]
                for s in sorted(
                    check_bridging(
                        m,
                        BridgingCondition(
                            1, 1.0, ValueFn([0.0, 0.0, -1.0]), StationaryPolicy((0, 0, 0))
                        ),
                        solve_from_above(m)[0],
                    ).s_zero_plus
                )
            ],
            ["0", "1"],
            "phi = T(0) - J_mu = (0, 0, -1); from 2 a policy can keep phi at -1 forever",
        )
    )
    entry.add(
        Expectation(
            "van_hee_s_zero_plus",
            lambda m: [
                m.state_ids[s]
                for s in sorted(check_van_hee(m, solve_from_above(m)[0]).s_zero_plus)
            ],
            ["0", "1"],
            "from 2 the sup-expectation of J* is 1 at every n >= 1",
        )
    )
    return entry


# -- countable chain models -------------------------------------------------


def _chain_expansion(
    cap: int,
    exact_for: int,
    root_cost: Callable[[int], float],
    chain_end: Callable[[int], int],
    cost: Callable[[int, int], float],
) -> Callable[[str], Expansion]:
    """Expansion of the countable chain family.

    The root (0,0) moves with action k to (1,k); state (i,j) with i > 0 moves
    to (i+1,j). Chain j becomes an absorbing zero-cost state at
    (chain_end(j), j), after which every cost is zero.
    """

    def expand(label: str) -> Expansion:
        i, j = parse_pair(label)
        if i == 0:
            actions = tuple(
                LazyAction(str(k), root_cost(k), ((_pair(1, k), 1.0),)) for k in range(cap + 1)
            )
            return Expansion(actions, exact_for=exact_for)
        if i >= chain_end(j):
            return Expansion((LazyAction("0", 0.0, ((label, 1.0),)),))
        return Expansion((LazyAction("0", cost(i, j), ((_pair(i + 1, j), 1.0),)),))

    return expand


def _no_limit_cost(i: int, j: int) -> float:
    if i == 2 * j + 2:
        return 2.0
    if i in (2 * j + 1, 2 * j + 3):
        return -1.0
    return 0.0


def _no_limit_j_star(i: int, j: int) -> float:
    if i == 2 * j + 2:
        return 1.0
    if i == 2 * j + 3:
        return -1.0
    return 0.0


def _no_limit_j_star_plus(i: int, j: int) -> float:
    return 2.0 if i <= 2 * j + 2 else 0.0


def _no_limit_j_star_minus(i: int, j: int) -> float:
    if i <= 2 * j + 1:
        return 2.0
    if i in (2 * j + 2, 2 * j + 3):
        return 1.0
    return 0.0


def _no_limit_start(c: float) -> Callable[[int, int], float]:
    def start(i: int, j: int) -> float:
        if i <= 2 * j + 2:
            return c
        if i == 2 * j + 3:
            return -1.0
        return 0.0

    return start


def example_5_1(horizon: int = 64) -> GalleryEntry:
    """Countable deterministic model where T^n(0) has no limit at (0,0).

    At (0,0) action k starts chain k; chain j pays -1, 2, -1 at positions
    2j+1, 2j+2, 2j+3 and nothing afterwards. T^n(0)((0,0)) alternates
    between -1 and 0 while J*((0,0)) = 0.

    Only actions k <= K = ceil(horizon / 2) are generated at (0,0). A chain
    k > K collects its first nonzero cost at position 2k+1 >= 2K+3, which n
    backups from (0,0) reach only when n >= 2K+4; for n <= 2K+2 such chains
    look like all-zero chains, and chain K already offers those values. The
    truncated root is therefore exact for 2K+2 backups.

    Args:
        horizon: Number of exact backups wanted at (0,0)
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    cap = math.ceil(horizon / 2)
    lazy = LazyMdp(
        [_pair(0, 0)],
        _chain_expansion(
            cap, 2 * cap + 2, lambda k: 0.0, lambda j: 2 * j + 4, _no_limit_cost
        ),
        horizon_bound=2 * cap + 4,
        name="example_5_1",
    )
    entry = GalleryEntry(
        "example_5_1",
        lazy,
        description="countable model where value iteration from 0 oscillates",
    )
    root = [_pair(0, 0)]

    def vi0(m: Mdp):
        return vi_from(m, ValueFn.zeros(m.n_states))

    entry.add(
        Expectation(
            "vi0_regime", lambda m: vi0(m).regime.value, "oscillating",
            "even n select a chain ending on its first -1, odd n cannot",
        )
    )
    entry.add(
        Expectation(
            "vi0_liminf", lambda m: _labelled(m, vi0(m).liminf, root), {root[0]: -1.0},
            "T^n(0)((0,0)) = -1 for even n >= 2",
        )
    )
    entry.add(
        Expectation(
            "vi0_limsup", lambda m: _labelled(m, vi0(m).limsup, root), {root[0]: 0.0},
            "T^n(0)((0,0)) = 0 for odd n",
        )
    )
    entry.add(
        Expectation(
            "j_star_root", lambda m: _labelled(m, solve_from_above(m)[0], root), {root[0]: 0.0},
            "every chain totals 0",
        )
    )

    entry.add(
        _chain_expectation(
            "j_star_chain",
            lambda m: solve_from_above(m)[0],
            _no_limit_j_star,
            "remaining costs along the chain: 1 just after the first -1, -1 just before the last",
        )
    )
    entry.add(
        _chain_expectation(
            "j_star_plus_chain",
            compute_j_star_plus,
            _no_limit_j_star_plus,
            "the cost 2 is still ahead up to position 2j+2",
        )
    )
    entry.add(
        _chain_expectation(
            "j_star_minus_chain",
            compute_j_star_minus,
            _no_limit_j_star_minus,
            "number of -1 costs still ahead",
        )
    )
    entry.add(
        Expectation(
            "start_function_root",
            lambda m: [
                float(fn[m.index_of(root[0])])
                for fn in apply_n(
                    OperatorKind.T,
                    m,
                    ValueFn([_start_value(label, 1.0) for label in m.state_ids]),
                    10,
                )[3:]
            ],
            [0.0] * 8,
            "a start above J*+ - J*- with c = 1 reaches J*((0,0)) = 0 from n = 3 on",
        )
    )
    entry.add(
        Expectation(
            "van_hee_s_zero_plus_excludes_root",
            lambda m: sorted(
                set(m.state_ids)
                - {m.state_ids[s] for s in check_van_hee(m, solve_from_above(m)[0]).s_zero_plus}
            ),
            root,
            "the sup-expectation of J* from (0,0) is 1 at every even n",
        )
    )
    entry.add(
        Expectation(
            "van_hee_s_zero_is_all",
            lambda m: len(check_van_hee(m, solve_from_above(m)[0]).s_zero) == m.n_states,
            True,
            "the sup-expectation of J* from (0,0) is at most 0 at every odd n",
        )
    )
    return entry


def _start_value(label: str, c: float) -> float:
    i, j = parse_pair(label)
    if i == 0:
        return c
    return _no_limit_start(c)(i, j)


def example_5_2(horizon: int = 64) -> GalleryEntry:
    """Countable deterministic model where J_inf differs from J*.

    At (0,0) action 0 costs 1 and the other actions are free; chain k pays
    1 at position k and nothing else. T^n(0)((0,0)) = 0 for every n, but
    every policy pays 1, so J*((0,0)) = 1.

    Only actions k <= K = horizon are generated at (0,0). Chain k pays its
    cost at stage k, which n backups from (0,0) reach only when n > k; chains
    k > K look free for n <= K, as chain K does. The truncated root is exact
    for K backups.

    Args:
        horizon: Number of exact backups wanted at (0,0)
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    cap = horizon
    lazy = LazyMdp(
        [_pair(0, 0)],
        _chain_expansion(
            cap,
            cap,
            lambda k: 1.0 if k == 0 else 0.0,
            lambda j: j + 1,
            lambda i, j: 1.0 if i == j else 0.0,
        ),
        horizon_bound=cap + 1,
        name="example_5_2",
    )
    entry = GalleryEntry(
        "example_5_2",
        lazy,
        description="countable model where the limit of value iteration from 0 is not J*",
    )
    root = [_pair(0, 0)]
    entry.add(
        Expectation(
            "vi0_root",
            lambda m: [
                float(fn[m.index_of(root[0])])
                for fn in apply_n(OperatorKind.T, m, ValueFn.zeros(m.n_states), cap)
            ],
            [0.0] * (cap + 1),
            "n backups can always pick a chain whose cost lies beyond stage n",
        )
    )
    entry.add(
        Expectation(
            "vi0_limsup",
            lambda m: _labelled(m, vi_from(m, ValueFn.zeros(m.n_states)).limsup, root),
            {root[0]: 0.0},
            "T^n(0)((0,0)) = 0 for every n",
        )
    )
    entry.add(
        Expectation(
            "j_star_root", lambda m: _labelled(m, solve_from_above(m)[0], root), {root[0]: 1.0},
            "every chain pays 1 exactly once",
        )
    )
    return entry


SLICED_ENTRIES = frozenset({"example_5_1", "example_5_2"})

GALLERY: Dict[str, Callable[..., GalleryEntry]] = {
    "example_4_1": example_4_1,
    "example_5_1": example_5_1,
    "example_5_2": example_5_2,
}


def list_entries() -> List[str]:
    """Identifiers of the built-in entries."""
    return sorted(GALLERY)


def get_entry(entry_id: str, horizon: Optional[int] = None) -> GalleryEntry:
    """Build a gallery entry.

    Args:
        entry_id: Entry identifier
        horizon: Exact horizon of a lazily generated entry (its default when None)

    Raises:
        KeyError: If the identifier is unknown
    """
    try:
        factory = GALLERY[entry_id]
    except KeyError:
        raise KeyError(f"unknown gallery entry {entry_id!r}; known: {', '.join(list_entries())}")
    if horizon is not None and entry_id in SLICED_ENTRIES:
        return factory(horizon)
    return factory()

