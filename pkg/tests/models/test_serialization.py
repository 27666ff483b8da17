"""Tests for reading and writing model files."""

import json
import math
import os
import tempfile
import unittest

from gcmdp.errors import ParseError, ValidationError
from gcmdp.models.mdp import Action, Mdp
from gcmdp.models.policy import StationaryPolicy
from gcmdp.models.serialization import (
    load_mdp,
    load_policy,
    load_value_fn,
    mdp_from_dict,
    mdp_to_dict,
    save_mdp,
    value_fn_from_json,
)
from gcmdp.models.value import ValueFn


def document():
    return {
        "name": "loop",
        "discount": 1.0,
        "states": ["s", "t"],
        "actions": {
            "s": [
                {"label": "go", "cost": 1, "transitions": [{"to": "t", "p": 1.0}]},
                {"label": "idle", "cost": 0, "transitions": [{"to": "s", "p": 1.0}]},
            ],
            "t": [{"label": "end", "cost": 0, "transitions": [{"to": "t", "p": 1.0}]}],
        },
    }


class TestMdpFromDict(unittest.TestCase):
    """Test case for decoding models."""

    def test_decode(self):
        """Test decoding a valid document."""
        mdp = mdp_from_dict(document())

        self.assertEqual(mdp.name, "loop")
        self.assertEqual(mdp.state_ids, ("s", "t"))
        self.assertEqual([a.label for a in mdp.actions[0]], ["go", "idle"])
        self.assertEqual(mdp.actions[0][0].transitions, ((1, 1.0),))

    def test_defaults(self):
        """Test that name and discount are optional."""
        data = document()
        del data["name"]
        del data["discount"]
        mdp = mdp_from_dict(data)

        self.assertEqual(mdp.name, "mdp")
        self.assertEqual(mdp.discount, 1.0)

    def test_unknown_key(self):
        """Test that unknown keys are validation errors."""
        data = document()
        data["root"] = "s"

        with self.assertRaises(ValidationError) as context:
            mdp_from_dict(data)
        self.assertEqual(len(context.exception.issues), 1)

    def test_unknown_target(self):
        """Test that transitions must name declared states."""
        data = document()
        data["actions"]["t"][0]["transitions"] = [{"to": "u", "p": 1.0}]

        with self.assertRaises(ValidationError):
            mdp_from_dict(data)

    def test_probability_sum(self):
        """Test the probability sum check and renormalization."""
        data = document()
        data["actions"]["s"][0]["transitions"] = [
            {"to": "s", "p": 0.5},
            {"to": "t", "p": 0.5000001},
        ]

        with self.assertRaises(ValidationError):
            mdp_from_dict(data)
        mdp = mdp_from_dict(data, renormalize=True)
        total = sum(p for _, p in mdp.actions[0][0].transitions)
        self.assertAlmostEqual(total, 1.0, places=12)

    def test_malformed(self):
        """Test structural parse errors."""
        with self.assertRaises(ParseError):
            mdp_from_dict([])
        data = document()
        data["states"] = "s"
        with self.assertRaises(ParseError):
            mdp_from_dict(data)
        data = document()
        data["actions"]["s"][0]["cost"] = "1"
        with self.assertRaises(ParseError):
            mdp_from_dict(data)

    def test_encode(self):
        """Test that encoding restores the document."""
        data = document()

        encoded = mdp_to_dict(mdp_from_dict(data))
        self.assertEqual(encoded["states"], data["states"])
        self.assertEqual(encoded["actions"]["s"][0]["transitions"], [{"to": "t", "p": 1.0}])
        self.assertEqual(encoded["actions"]["s"][0]["cost"], 1.0)


class TestFiles(unittest.TestCase):
    """Test case for model, value and policy files."""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.directory.cleanup()

    def path(self, name):
        return os.path.join(self.directory.name, name)

    def write(self, name, data):
        with open(self.path(name), "w", encoding="utf-8") as f:
            if isinstance(data, str):
                f.write(data)
            else:
                json.dump(data, f)
        return self.path(name)

    def test_save_and_load(self):
        """Test writing a model and reading it back."""
        mdp = Mdp(
            ["a", "b"],
            [[Action("x", -0.25, ((1, 0.5), (0, 0.5)))], [Action("y", 0.0, ((1, 1.0),))]],
            discount=0.9,
            name="saved",
        )
        save_mdp(mdp, self.path("model.json"))
        loaded = load_mdp(self.path("model.json"))

        self.assertEqual(loaded.state_ids, mdp.state_ids)
        self.assertEqual(loaded.discount, 0.9)
        self.assertEqual(loaded.actions, mdp.actions)

    def test_invalid_json(self):
        """Test that broken JSON is a parse error."""
        with self.assertRaises(ParseError):
            load_mdp(self.write("broken.json", "{"))

    def test_missing_file(self):
        """Test that a missing file raises OSError."""
        with self.assertRaises(OSError):
            load_mdp(self.path("missing.json"))

    def test_value_fn(self):
        """Test list and mapping forms of a value function."""
        mdp = mdp_from_dict(document())

        self.assertEqual(load_value_fn(self.write("v.json", [0, "inf"]), mdp), ValueFn([0, math.inf]))
        self.assertEqual(value_fn_from_json({"t": 1, "s": -2}, mdp), ValueFn([-2.0, 1.0]))
        with self.assertRaises(ParseError):
            value_fn_from_json([1.0], mdp)
        with self.assertRaises(ParseError):
            value_fn_from_json({"s": 1, "t": 2, "u": 3}, mdp)
        with self.assertRaises(ParseError):
            value_fn_from_json([0, "-inf"], mdp)

    def test_policy(self):
        """Test reading a stationary policy."""
        mdp = mdp_from_dict(document())

        policy = load_policy(self.write("p.json", {"s": "idle", "t": "end"}), mdp)
        self.assertEqual(policy, StationaryPolicy((1, 0)))
        with self.assertRaises(ParseError):
            load_policy(self.write("q.json", {"s": "jump", "t": "end"}), mdp)


if __name__ == "__main__":
    unittest.main()
