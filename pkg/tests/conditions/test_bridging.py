"""Tests for the bridging conditions."""

import math
import unittest

import numpy as np

from gcmdp.conditions.bridging import check_bridging, check_fixed_point_bridging
from gcmdp.conditions.reports import BridgingCondition, Certificate
from gcmdp.errors import ConditionViolated, NotAFixedPoint, PreconditionViolated
from gcmdp.gallery.examples import example_4_1
from gcmdp.models.mdp import Action, Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.value import ValueFn


def swap_model():
    """Two free states that move into each other."""
    return Mdp(
        ["a", "b"],
        [[Action("go", 0.0, ((1, 1.0),))], [Action("go", 0.0, ((0, 1.0),))]],
        name="swap",
    )


J_STAR_4_1 = ValueFn([0.0, 1.0, 0.0])


class TestBridgingCondition(unittest.TestCase):
    """Test case for BridgingCondition."""

    def test_parameters(self):
        """Test parameter validation."""
        phi = ValueFn.zeros(2)
        with self.assertRaises(ValueError):
            BridgingCondition(-1, 1.0, phi)
        with self.assertRaises(ValueError):
            BridgingCondition(0, 0.0, phi)
        with self.assertRaises(ValueError):
            BridgingCondition(0, 1.5, phi)
        with self.assertRaises(ValueError):
            BridgingCondition(0, 1.0, ValueFn([0.0, math.inf]))
        with self.assertRaises(ValueError):
            BridgingCondition(0, 1.0, phi, reference="J_mu")

    def test_uses_policy(self):
        """Test the reference kind."""
        phi = ValueFn.zeros(2)

        self.assertFalse(BridgingCondition(0, 1.0, phi).uses_policy)
        self.assertTrue(BridgingCondition(0, 1.0, phi, StationaryPolicy((0, 0))).uses_policy)


class TestCheckBridging(unittest.TestCase):
    """Test case for check_bridging."""

    def test_example(self):
        """Test that the stuck state is excluded on the three-state example."""
        mdp = example_4_1().model
        cond = BridgingCondition(1, 1.0, ValueFn([0.0, 0.0, -1.0]))

        report = check_bridging(mdp, cond, J_STAR_4_1)
        self.assertTrue(report.condition_holds)
        self.assertEqual(report.s_zero_plus, frozenset({0, 1}))
        self.assertEqual(report.s_zero, frozenset({0, 1}))
        self.assertEqual(report.certified[0], Certificate.LIMIT)
        self.assertEqual(report.certified[2], Certificate.UNCERTIFIED)
        self.assertFalse(report.heuristic_flag)
        self.assertFalse(report.global_convergence)
        np.testing.assert_allclose(report.slack, [0.0, 0.0, 0.0])

    def test_policy_reference(self):
        """Test a stationary policy as the reference cost."""
        mdp = example_4_1().model
        cond = BridgingCondition(1, 1.0, ValueFn([0.0, 0.0, -1.0]), StationaryPolicy((0, 0, 0)))

        report = check_bridging(mdp, cond, J_STAR_4_1)
        self.assertEqual(report.s_zero_plus, frozenset({0, 1}))
        self.assertEqual(
            report.to_dict(mdp)["witness"]["reference"],
            {"policy": {"0": "stay", "1": "exit", "2": "stay"}},
        )

    def test_violated(self):
        """Test that a failing inequality reports its slacks."""
        mdp = example_4_1().model
        cond = BridgingCondition(1, 1.0, ValueFn.zeros(3))

        with self.assertRaises(ConditionViolated) as context:
            check_bridging(mdp, cond, J_STAR_4_1)
        report = context.exception.report
        self.assertFalse(report.condition_holds)
        self.assertEqual(report.failing_states(1e-9), frozenset({2}))
        self.assertEqual(report.slack[2], -1.0)

    def test_limsup_only(self):
        """Test an oscillating offset: every state lands in S0 but not S0+."""
        mdp = swap_model()
        phi = ValueFn([0.0, -1.0])

        report = check_bridging(mdp, BridgingCondition(0, 1.0, phi), ValueFn.zeros(2))
        self.assertEqual(report.s_zero_plus, frozenset())
        self.assertEqual(report.s_zero, frozenset({0, 1}))
        self.assertEqual(report.states_with(Certificate.LIMSUP), frozenset({0, 1}))

        report = check_bridging(mdp, BridgingCondition(1, 1.0, phi), ValueFn.zeros(2))
        self.assertEqual(report.states_with(Certificate.CONDITIONAL), frozenset({0, 1}))

    def test_phi_length(self):
        """Test that phi must fit the model."""
        with self.assertRaises(PreconditionViolated):
            check_bridging(
                example_4_1().model, BridgingCondition(0, 1.0, ValueFn.zeros(2)), J_STAR_4_1
            )

    def test_to_dict(self):
        """Test the shared report layout."""
        mdp = example_4_1().model
        report = check_bridging(mdp, BridgingCondition(1, 1.0, ValueFn([0.0, 0.0, -1.0])), J_STAR_4_1)

        data = report.to_dict(mdp)
        self.assertEqual(data["theorem"], "bridging")
        self.assertTrue(data["holds"])
        self.assertEqual(data["s_zero_plus"], ["0", "1"])
        self.assertEqual(data["witness"]["certified"]["2"], "uncertified")
        self.assertEqual(data["witness"]["n_bar"], 1)


class TestFixedPointBridging(unittest.TestCase):
    """Test case for check_fixed_point_bridging."""

    def test_example(self):
        """Test the wrong fixed point of the three-state example."""
        mdp = example_4_1().model
        cond = BridgingCondition(1, 1.0, ValueFn([0.0, 0.0, -1.0]))

        report = check_fixed_point_bridging(mdp, cond, ValueFn([0.0, 1.0, -1.0]), J_STAR_4_1)
        self.assertEqual(report.theorem, "fixed_point_bridging")
        self.assertEqual(report.s_zero_plus, frozenset({0, 1}))
        self.assertEqual(report.certified[0], Certificate.LIMSUP)
        self.assertEqual(report.certified[2], Certificate.UNCERTIFIED)

    def test_not_a_fixed_point(self):
        """Test that J_inf must solve the optimality equation."""
        mdp = example_4_1().model
        cond = BridgingCondition(1, 1.0, ValueFn([0.0, 0.0, -1.0]))

        with self.assertRaises(NotAFixedPoint):
            check_fixed_point_bridging(mdp, cond, ValueFn.zeros(3), J_STAR_4_1)

    def test_violated(self):
        """Test a fixed point below the bound."""
        mdp = example_4_1().model
        cond = BridgingCondition(0, 1.0, ValueFn.zeros(3))

        with self.assertRaises(ConditionViolated):
            check_fixed_point_bridging(mdp, cond, ValueFn([0.0, 1.0, -1.0]), J_STAR_4_1)

    def test_fixed_point_other_than_limsup(self):
        """Test that a fixed point other than limsup T^n(0) is rejected."""
        mdp = example_4_1().model
        cond = BridgingCondition(0, 1.0, ValueFn.zeros(3))

        with self.assertRaises(PreconditionViolated):
            check_fixed_point_bridging(mdp, cond, J_STAR_4_1, J_STAR_4_1)

    def test_observed_limsup(self):
        """Test that J_inf is taken from T^n(0) when not given."""
        mdp = example_4_1().model
        cond = BridgingCondition(0, 1.0, ValueFn([0.0, 0.0, -1.0]))

        report = check_fixed_point_bridging(mdp, cond, None, J_STAR_4_1)
        self.assertEqual(report.witness["j_infinity"], [0.0, 1.0, -1.0])
        self.assertEqual(report.states_with(Certificate.LIMSUP), frozenset({0, 1}))

    def test_unconfirmed_limsup(self):
        """Test that nothing is certified while T^n(0) has not settled."""
        mdp = Mdp(
            ["a", "z"],
            [
                [Action("wait", 1.0, ((0, 0.999), (1, 0.001)))],
                [Action("rest", 0.0, ((1, 1.0),))],
            ],
            name="slow",
        )
        j_star = ValueFn([1000.0, 0.0])
        cond = BridgingCondition(0, 1.0, ValueFn.zeros(2))

        report = check_fixed_point_bridging(mdp, cond, j_star, j_star, horizon=16, window=8)
        self.assertIn(0, report.heuristic_states)
        self.assertTrue(report.heuristic_flag)
        self.assertEqual(report.states_with(Certificate.UNCERTIFIED), frozenset({0, 1}))


if __name__ == "__main__":
    unittest.main()
