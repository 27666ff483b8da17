"""Tests for the sup-expectation and tail conditions."""

import unittest

import numpy as np

from gcmdp.conditions.reports import Certificate
from gcmdp.conditions.tails import check_tail_condition, check_van_hee, sup_expectations
from gcmdp.errors import GcViolation, TailDiverges
from gcmdp.gallery.examples import example_4_1, example_5_1
from gcmdp.models.mdp import Action, Mdp
from gcmdp.models.value import ValueFn
from gcmdp.solvers.value_iteration import solve_from_above


def paying_loop():
    return Mdp(["s"], [[Action("pay", 1.0, ((0, 1.0),))]], name="paying_loop")


class TestSupExpectations(unittest.TestCase):
    """Test case for sup_expectations."""

    def test_example(self):
        """Test that the stuck state can keep the value of state 1."""
        rows = sup_expectations(example_4_1().model, ValueFn([0.0, 1.0, 0.0]), 3)

        self.assertEqual(rows.shape, (4, 3))
        np.testing.assert_array_equal(rows[0], [0.0, 1.0, 0.0])
        np.testing.assert_array_equal(rows[3], [0.0, 0.0, 1.0])


class TestVanHee(unittest.TestCase):
    """Test case for check_van_hee."""

    def test_example(self):
        """Test the three-state example."""
        mdp = example_4_1().model
        report = check_van_hee(mdp, ValueFn([0.0, 1.0, 0.0]))

        self.assertEqual(report.theorem, "van_hee")
        self.assertTrue(report.condition_holds)
        self.assertEqual(report.s_zero_plus, frozenset({0, 1}))
        self.assertEqual(report.s_zero, frozenset({0, 1}))
        self.assertEqual(report.certified[1], Certificate.LIMIT)
        self.assertEqual(report.certified[2], Certificate.UNCERTIFIED)
        self.assertFalse(report.global_convergence)

    def test_oscillating_slice(self):
        """Test that the root of the oscillating model is in S0 but not S0+."""
        mdp = example_5_1(horizon=16).materialize()
        j_star, _ = solve_from_above(mdp)
        report = check_van_hee(mdp, j_star)

        self.assertNotIn(0, report.s_zero_plus)
        self.assertIn(0, report.s_zero)
        self.assertEqual(report.s_zero_plus, frozenset(range(1, mdp.n_states)))
        self.assertEqual(report.certified[0], Certificate.LIMSUP)

    def test_global(self):
        """Test a model where every state is certified."""
        mdp = Mdp(["s"], [[Action("rest", 0.0, ((0, 1.0),))]])
        report = check_van_hee(mdp, ValueFn.zeros(1))

        self.assertTrue(report.global_convergence)
        self.assertEqual(report.to_dict(mdp)["witness"]["global_convergence"], True)

    def test_gc_required(self):
        """Test that GC is required."""
        mdp = Mdp(["s"], [[Action("gain", -1.0, ((0, 1.0),))]])

        with self.assertRaises(GcViolation):
            check_van_hee(mdp, ValueFn.zeros(1))


class TestTailCondition(unittest.TestCase):
    """Test case for check_tail_condition."""

    def test_example(self):
        """Test the tail sequence of the three-state example."""
        mdp = example_4_1().model
        report = check_tail_condition(mdp)

        self.assertEqual(report.theorem, "tail")
        self.assertEqual(report.s_zero_plus, frozenset({0, 1}))
        self.assertEqual(report.witness["diverging"], [])

    def test_oscillating_slice(self):
        """Test that the tail condition holds at every state of the oscillating model."""
        for horizon in (16, 64):
            mdp = example_5_1(horizon=horizon).materialize()
            report = check_tail_condition(mdp)

            self.assertEqual(report.witness["diverging"], [])
            self.assertEqual(report.s_zero, frozenset(range(mdp.n_states)))
            self.assertEqual(report.s_zero_plus, frozenset(range(1, mdp.n_states)))
            self.assertEqual(report.certified[0], Certificate.LIMSUP)

    def test_strict_divergence(self):
        """Test that an infinite tail raises in strict mode."""
        with self.assertRaises(TailDiverges) as context:
            check_tail_condition(paying_loop())
        self.assertEqual(context.exception.report.certified[0], Certificate.UNCERTIFIED)

    def test_lenient_divergence(self):
        """Test that an infinite tail is reported when not strict."""
        report = check_tail_condition(paying_loop(), strict=False)

        self.assertEqual(report.witness["diverging"], ["s"])
        self.assertEqual(report.certified[0], Certificate.UNCERTIFIED)
        self.assertEqual(report.s_zero_plus, frozenset())


if __name__ == "__main__":
    unittest.main()
