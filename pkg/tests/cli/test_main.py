"""Tests for the gcmdp command."""

import json
import os
import shutil
import tempfile
import unittest

from gcmdp.cli.main import EXIT_CAP, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, build_parser, main
from gcmdp.cli.output import read_trace_csv
from gcmdp.models.mdp import Action, Mdp
from gcmdp.models.serialization import load_mdp, save_mdp
from gcmdp.models.value import ValueFn


class CliTestCase(unittest.TestCase):
    """Shared temporary directory and helpers."""

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.output = os.path.join(self.temp_dir, "out.json")

    def tearDown(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir)

    def path(self, name):
        return os.path.join(self.temp_dir, name)

    def write_json(self, name, data):
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        return path

    def save(self, mdp, name):
        path = self.path(name)
        save_mdp(mdp, path)
        return path

    def run_main(self, *argv):
        return main([*argv, "--output", self.output])

    def result(self):
        with open(self.output, encoding="utf-8") as f:
            return json.load(f)


class TestParser(unittest.TestCase):
    """Test case for the argument parser."""

    def test_defaults(self):
        """Test that the horizon is left to the model when not given."""
        args = build_parser().parse_args(["check", "gc", "model.json"])

        self.assertIsNone(args.horizon)
        self.assertEqual(args.format, "json")

    def test_bridging_requires_phi(self):
        """Test that the bridging check needs an offset file."""
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["check", "bridging", "model.json"])


class TestCheck(CliTestCase):
    """Test case for the check command."""

    def test_gc_holds(self):
        """Test GC on a gallery model."""
        self.assertEqual(self.run_main("check", "gc", "gallery:example_4_1"), EXIT_OK)
        data = self.result()
        self.assertEqual(data["theorem"], "gc")
        self.assertTrue(data["holds"])

    def test_gc_violated(self):
        """Test that a negative loop exits with 2."""
        path = self.save(Mdp(["s"], [[Action("loop", -1.0, ((0, 1.0),))]], name="neg_loop"), "neg.json")

        self.assertEqual(self.run_main("check", "gc", path), EXIT_VIOLATION)
        self.assertFalse(self.result()["holds"])

    def test_van_hee_needs_gc(self):
        """Test that the other checks reject models violating GC."""
        path = self.save(Mdp(["s"], [[Action("loop", -1.0, ((0, 1.0),))]], name="neg_loop"), "neg.json")

        self.assertEqual(self.run_main("check", "van-hee", path), EXIT_ERROR)

    def test_van_hee(self):
        """Test the sup-expectation check on a gallery model."""
        self.assertEqual(self.run_main("check", "van-hee", "gallery:example_4_1"), EXIT_OK)
        self.assertEqual(self.result()["s_zero_plus"], ["0", "1"])

    def test_bridging(self):
        """Test the bridging check with an offset file."""
        phi = self.write_json("phi.json", [0.0, 0.0, -1.0])

        code = self.run_main(
            "check", "bridging", "gallery:example_4_1", "--nbar", "1", "--phi-file", phi
        )
        self.assertEqual(code, EXIT_OK)
        data = self.result()
        self.assertEqual(data["s_zero_plus"], ["0", "1"])
        self.assertEqual(data["witness"]["certified"]["2"], "uncertified")

    def test_bridging_violated(self):
        """Test that a failing inequality exits with 2 and reports the slack."""
        phi = self.write_json("phi.json", {"0": 0.0, "1": 0.0, "2": 0.0})

        code = self.run_main(
            "check", "bridging", "gallery:example_4_1", "--nbar", "1", "--phi-file", phi
        )
        self.assertEqual(code, EXIT_VIOLATION)
        data = self.result()
        self.assertFalse(data["holds"])
        self.assertEqual(data["witness"]["slack"]["2"], -1.0)

    def test_fixed_point_bridging(self):
        """Test the fixed point variant."""
        phi = self.write_json("phi.json", [0.0, 0.0, -1.0])

        code = self.run_main(
            "check", "bridging", "gallery:example_4_1", "--phi-file", phi, "--fixed-point"
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(self.result()["theorem"], "fixed_point_bridging")

    def test_ud_undiscounted(self):
        """Test that the discounted checks reject undiscounted models."""
        self.assertEqual(self.run_main("check", "ud", "gallery:example_4_1"), EXIT_ERROR)

    def test_ud(self):
        """Test the discounted checks."""
        path = self.save(
            Mdp(["s"], [[Action("gain", -1.0, ((0, 1.0),))]], discount=0.5, name="gain"), "gain.json"
        )

        self.assertEqual(self.run_main("check", "ud", path), EXIT_OK)
        self.assertTrue(self.result()["witness"]["bounded_above"])

    def test_tail_diverges(self):
        """Test that an infinite tail exits with 2."""
        path = self.save(Mdp(["s"], [[Action("pay", 1.0, ((0, 1.0),))]], name="pay"), "pay.json")

        self.assertEqual(self.run_main("check", "tail", path), EXIT_VIOLATION)
        self.assertEqual(self.result()["witness"]["diverging"], ["s"])

    def test_missing_file(self):
        """Test that a missing model file exits with 1."""
        self.assertEqual(self.run_main("check", "gc", self.path("missing.json")), EXIT_ERROR)

    def test_unknown_gallery_entry(self):
        """Test that an unknown gallery entry exits with 1."""
        self.assertEqual(self.run_main("check", "gc", "gallery:nonexistent"), EXIT_ERROR)


class TestSolve(CliTestCase):
    """Test case for the solve command."""

    def test_from_above(self):
        """Test J* of a gallery model."""
        self.assertEqual(
            self.run_main("solve", "gallery:example_4_1", "--method", "from-above"), EXIT_OK
        )
        data = self.result()
        self.assertEqual(data["regime"], "converged")
        self.assertEqual(data["limit"], {"0": 0.0, "1": 1.0, "2": 0.0})

    def test_cap(self):
        """Test that a cap exits with 3."""
        path = self.save(
            Mdp(["s"], [[Action("gain", -1.0, ((0, 1.0),))]], discount=0.5, name="gain"), "gain.json"
        )

        code = self.run_main("solve", path, "--method", "from-above", "--max-iter", "3")
        self.assertEqual(code, EXIT_CAP)
        self.assertEqual(self.result()["regime"], "cap_reached")

    def test_vi0_wrong_limit(self):
        """Test that value iteration from 0 reports its wrong limit."""
        self.assertEqual(self.run_main("solve", "gallery:example_4_1", "--method", "vi0"), EXIT_OK)
        self.assertEqual(self.result()["limit"], {"0": 0.0, "1": 1.0, "2": -1.0})

    def test_vi0_exported_slice(self):
        """Test the oscillating root of an exported slice."""
        model = self.path("slice.json")
        self.assertEqual(
            main(["gallery", "export", "example_5_1", model, "--horizon", "64"]), EXIT_OK
        )

        code = self.run_main(
            "solve", model, "--method", "vi0", "--start-state", "(0,0)", "--horizon", "64"
        )
        self.assertEqual(code, EXIT_OK)
        data = self.result()
        self.assertEqual(data["regime"], "oscillating")
        self.assertEqual(data["watch"], "(0,0)")
        self.assertEqual(data["liminf"]["(0,0)"], -1.0)
        self.assertEqual(data["limsup"]["(0,0)"], 0.0)

    def test_vi0_gallery_slice(self):
        """Test that a gallery slice keeps its exact horizon."""
        code = self.run_main("solve", "gallery:example_5_1", "--method", "vi0", "--horizon", "32")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(self.result()["regime"], "oscillating")

    def test_trace_csv(self):
        """Test the trace file next to the JSON summary."""
        trace = self.path("trace.csv")

        code = self.run_main("solve", "gallery:example_4_1", "--method", "tilde", "--trace", trace)
        self.assertEqual(code, EXIT_OK)
        with open(trace, encoding="utf-8") as f:
            labels, indices, iterates = read_trace_csv(f)
        self.assertEqual(labels, ["0", "1", "2"])
        self.assertEqual(indices[0], 0)
        self.assertEqual(list(iterates[-1].values), [0.0, 1.0, 0.0])
        self.assertEqual(self.result()["regime"], "converged")

    def test_csv_format(self):
        """Test the trace CSV as the main output."""
        code = self.run_main("solve", "gallery:example_4_1", "--method", "vi0", "--format", "csv")
        self.assertEqual(code, EXIT_OK)
        with open(self.output, encoding="utf-8") as f:
            self.assertEqual(f.readline().strip(), "n,0,1,2")

    def test_csv_format_summary(self):
        """Test that the CSV output comes with a JSON summary beside it."""
        code = self.run_main("solve", "gallery:example_4_1", "--method", "vi0", "--format", "csv")
        self.assertEqual(code, EXIT_OK)
        with open(self.path("out.summary.json"), encoding="utf-8") as f:
            summary = json.load(f)
        self.assertEqual(summary["regime"], "converged")
        self.assertEqual(summary["limit"], {"0": 0.0, "1": 1.0, "2": -1.0})

    def test_summary_path(self):
        """Test an explicit summary path."""
        summary = self.path("summary.json")

        code = self.run_main(
            "solve", "gallery:example_4_1", "--method", "tilde", "--format", "csv",
            "--summary", summary,
        )
        self.assertEqual(code, EXIT_OK)
        with open(summary, encoding="utf-8") as f:
            self.assertEqual(json.load(f)["regime"], "converged")

    def test_default_trace(self):
        """Test that the JSON output comes with a trace CSV beside it."""
        self.assertEqual(self.run_main("solve", "gallery:example_4_1", "--method", "vi0"), EXIT_OK)
        with open(self.path("out.trace.csv"), encoding="utf-8") as f:
            labels, indices, iterates = read_trace_csv(f)
        self.assertEqual(labels, ["0", "1", "2"])
        self.assertEqual(iterates[-1], ValueFn([0.0, 1.0, -1.0]))
        self.assertEqual(self.result()["regime"], "converged")

    def test_cap_writes_partial_outputs(self):
        """Test that a cap still leaves the trace and the summary."""
        path = self.save(
            Mdp(["s"], [[Action("gain", -1.0, ((0, 1.0),))]], discount=0.5, name="gain"), "gain.json"
        )

        code = self.run_main("solve", path, "--method", "vi0", "--max-iter", "3")
        self.assertEqual(code, EXIT_CAP)
        self.assertTrue(os.path.exists(self.path("out.trace.csv")))
        self.assertEqual(self.result()["iterations"], 3)

    def test_brute_force(self):
        """Test the brute-force oracle."""
        self.assertEqual(
            self.run_main("solve", "gallery:example_4_1", "--method", "brute-force"), EXIT_OK
        )
        data = self.result()
        self.assertEqual(data["j_star"], {"0": 0.0, "1": 1.0, "2": 0.0})
        self.assertEqual(data["policy"], {"0": "stay", "1": "exit", "2": "stay"})

    def test_transfinite(self):
        """Test the transfinite surrogate."""
        self.assertEqual(
            self.run_main("solve", "gallery:example_4_1", "--method", "transfinite"), EXIT_OK
        )
        self.assertEqual(self.result()["passes"], 1)


class TestPolicy(CliTestCase):
    """Test case for the policy command."""

    def test_stationary(self):
        """Test the optimal stationary policy."""
        self.assertEqual(self.run_main("policy", "stationary", "gallery:example_4_1"), EXIT_OK)
        data = self.result()
        self.assertEqual(data["policy"], {"0": "stay", "1": "exit", "2": "stay"})
        self.assertEqual(data["max_slack"], 0.0)

    def test_epsilon_optimal(self):
        """Test the semi-Markov policy."""
        code = self.run_main("policy", "epsilon-optimal", "gallery:example_4_1", "--eps", "0.1")
        self.assertEqual(code, EXIT_OK)
        data = self.result()
        self.assertIn("partition", data["policy"])
        self.assertLessEqual(data["max_slack"], 0.1 + 1e-9)

    def test_negative_j_star(self):
        """Test that the stationary construction needs J* >= 0."""
        path = self.save(
            Mdp(["s"], [[Action("gain", -1.0, ((0, 1.0),))]], discount=0.5, name="gain"), "gain.json"
        )

        self.assertEqual(self.run_main("policy", "stationary", path), EXIT_ERROR)


class TestGallery(CliTestCase):
    """Test case for the gallery command."""

    def test_list(self):
        """Test the entry listing."""
        self.assertEqual(self.run_main("gallery", "list"), EXIT_OK)
        data = self.result()
        self.assertEqual([item["id"] for item in data], ["example_4_1", "example_5_1", "example_5_2"])
        self.assertTrue(data[1]["lazy"])

    def test_random(self):
        """Test writing a random model."""
        path = self.path("random.json")

        self.assertEqual(main(["gallery", "random", path, "--seed", "3", "--states", "4"]), EXIT_OK)
        mdp = load_mdp(path)
        self.assertEqual(mdp.n_states, 4)
        self.assertEqual(mdp.name, "random_3")

    def test_export_unknown(self):
        """Test that exporting an unknown entry exits with 1."""
        self.assertEqual(main(["gallery", "export", "nonexistent", self.path("x.json")]), EXIT_ERROR)


class TestReproduce(CliTestCase):
    """Test case for the reproduce command."""

    def test_entry(self):
        """Test that a built-in entry reproduces."""
        self.assertEqual(self.run_main("reproduce", "example_4_1"), EXIT_OK)
        self.assertTrue(self.result()[0]["passed"])

    def test_unknown(self):
        """Test that an unknown entry exits with 1."""
        self.assertEqual(self.run_main("reproduce", "nonexistent"), EXIT_ERROR)


if __name__ == "__main__":
    unittest.main()
