"""Tests for lazily generated models."""

import math
import unittest
from collections import deque

from gcmdp.errors import ExpansionBudgetExceeded, PreconditionViolated
from gcmdp.gallery.examples import example_5_1, example_5_2
from gcmdp.models.lazy import (
    BOUNDARY_ACTION,
    Expansion,
    LazyAction,
    LazyMdp,
    materialize_horizon,
)


def depths_from_root(mdp):
    """Breadth-first depth of every state from state 0."""
    depths = {0: 0}
    queue = deque([0])
    while queue:
        state = queue.popleft()
        for target in mdp.successors(state):
            if target not in depths:
                depths[target] = depths[state] + 1
                queue.append(target)
    return [depths.get(s, math.inf) for s in range(mdp.n_states)]


def counting_expand(calls):
    def expand(label):
        calls.append(label)
        n = int(label)
        if n == 3:
            return Expansion((LazyAction("rest", 0.0, (("3", 1.0),)),))
        return Expansion((LazyAction("next", 1.0, ((str(n + 1), 1.0),)),))

    return expand


class TestLazyMdp(unittest.TestCase):
    """Test case for LazyMdp class."""

    def test_init(self):
        """Test initialization."""
        lazy = LazyMdp(["0"], counting_expand([]), horizon_bound=5, name="line")

        self.assertEqual(lazy.root_states, ("0",))
        self.assertEqual(lazy.horizon_bound, 5)
        self.assertEqual(lazy.name, "line")

    def test_requires_root(self):
        """Test that a root is required."""
        with self.assertRaises(ValueError):
            LazyMdp([], counting_expand([]), horizon_bound=1)

    def test_expand_is_cached(self):
        """Test that expansions are computed once."""
        calls = []
        lazy = LazyMdp(["0"], counting_expand(calls), horizon_bound=5)

        first = lazy.expand("1")
        second = lazy.expand("1")
        self.assertIs(first, second)
        self.assertEqual(calls, ["1"])


class TestMaterializeHorizon(unittest.TestCase):
    """Test case for horizon slices."""

    def test_boundary_states(self):
        """Test that the frontier gets a synthetic self-loop."""
        lazy = LazyMdp(["0"], counting_expand([]), horizon_bound=5, name="line")
        mdp = lazy.slice(horizon=2)

        self.assertEqual(mdp.state_ids, ("0", "1", "2"))
        self.assertEqual(mdp.boundary, frozenset({2}))
        self.assertEqual(mdp.actions[2][0].label, BOUNDARY_ACTION)
        self.assertEqual(mdp.actions[2][0].transitions, ((2, 1.0),))
        self.assertEqual(mdp.root, 0)
        self.assertEqual(mdp.name, "line[0:2]")
        self.assertEqual(list(mdp.exact_horizon), [2.0, 1.0, 0.0])

    def test_closed_frontier_keeps_real_actions(self):
        """Test that a self-looping frontier state is not replaced."""
        lazy = LazyMdp(["0"], counting_expand([]), horizon_bound=5)
        mdp = lazy.slice(horizon=3)

        self.assertEqual(mdp.boundary, frozenset())
        self.assertEqual(mdp.actions[3][0].label, "rest")
        self.assertTrue(all(math.isinf(e) for e in mdp.exact_horizon))

    def test_exact_for_propagates(self):
        """Test that truncated action sets limit exactness upstream."""

        def expand(label):
            if label == "root":
                return Expansion((LazyAction("a", 0.0, (("leaf", 1.0),)),), exact_for=4)
            return Expansion((LazyAction("b", 0.0, (("leaf", 1.0),)),))

        lazy = LazyMdp(["root"], expand, horizon_bound=3)
        mdp = lazy.slice()

        self.assertEqual(mdp.exact_horizon[0], 4.0)
        self.assertTrue(math.isinf(mdp.exact_horizon[1]))

    def test_start_state(self):
        """Test slicing at a non-root label."""
        lazy = LazyMdp(["0"], counting_expand([]), horizon_bound=5)
        mdp = lazy.slice(start="2", horizon=1)

        self.assertEqual(mdp.state_ids, ("2", "3"))

    def test_horizon_bound(self):
        """Test that the horizon cannot exceed its bound."""
        lazy = LazyMdp(["0"], counting_expand([]), horizon_bound=2)

        with self.assertRaises(PreconditionViolated):
            lazy.slice(horizon=3)

    def test_expansion_cap(self):
        """Test the state budget."""
        lazy = LazyMdp(["0"], counting_expand([]), horizon_bound=5)

        with self.assertRaises(ExpansionBudgetExceeded):
            materialize_horizon(lazy, "0", 3, cap=2)

    def test_root_index(self):
        """Test that a root state may be given by its index."""
        lazy = LazyMdp(["0", "2"], counting_expand([]), horizon_bound=5)

        self.assertEqual(materialize_horizon(lazy, 1, 1).state_ids, ("2", "3"))
        self.assertEqual(materialize_horizon(lazy, 0, 2).state_ids, ("0", "1", "2"))
        self.assertEqual(lazy.slice(start=1, horizon=1).state_ids, ("2", "3"))
        with self.assertRaises(IndexError):
            materialize_horizon(lazy, 2, 1)

    def test_deeper_slice_keeps_prefix(self):
        """Test that slices at n and n+1 agree on states above depth n."""
        for entry in (example_5_1(horizon=8), example_5_2(horizon=8)):
            lazy = entry.model
            for n in range(6):
                small = materialize_horizon(lazy, 0, n)
                large = materialize_horizon(lazy, 0, n + 1)
                for state, depth in enumerate(depths_from_root(small)):
                    if depth < n:
                        self.assertEqual(small.state_ids[state], large.state_ids[state])
                        self.assertEqual(small.actions[state], large.actions[state])


if __name__ == "__main__":
    unittest.main()
