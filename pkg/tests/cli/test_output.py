"""Tests for trace CSV and JSON output."""

import io
import math
import os
import shutil
import tempfile
import unittest

from gcmdp.cli.output import format_number, open_output, read_trace_csv, write_json, write_trace_csv
from gcmdp.gallery.examples import example_4_1
from gcmdp.models.value import ValueFn
from gcmdp.solvers.value_iteration import vi_from


class TestFormatNumber(unittest.TestCase):
    """Test case for format_number."""

    def test_format(self):
        """Test decimals and infinity."""
        self.assertEqual(format_number(1.0), "1")
        self.assertEqual(format_number(0.1), "0.10000000000000001")
        self.assertEqual(format_number(math.inf), "inf")


class TestTraceCsv(unittest.TestCase):
    """Test case for the trace CSV."""

    def test_write_and_read(self):
        """Test that the written trace parses back."""
        mdp = example_4_1().model
        trace = vi_from(mdp, ValueFn.zeros(3))
        stream = io.StringIO()

        write_trace_csv(trace, mdp, stream)
        stream.seek(0)
        labels, indices, iterates = read_trace_csv(stream)
        self.assertEqual(labels, ["0", "1", "2"])
        self.assertEqual(indices, trace.indices)
        self.assertEqual(iterates[-1], ValueFn([0.0, 1.0, -1.0]))

    def test_infinity(self):
        """Test that +inf survives the CSV."""
        stream = io.StringIO("n,a\n0,inf\n")

        _, _, iterates = read_trace_csv(stream)
        self.assertTrue(math.isinf(iterates[0][0]))

    def test_malformed(self):
        """Test header and row checks."""
        with self.assertRaises(ValueError):
            read_trace_csv(io.StringIO(""))
        with self.assertRaises(ValueError):
            read_trace_csv(io.StringIO("k,a\n0,1\n"))
        with self.assertRaises(ValueError):
            read_trace_csv(io.StringIO("n,a,b\n0,1\n"))


class TestOutput(unittest.TestCase):
    """Test case for open_output and write_json."""

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir)

    def test_write_json(self):
        """Test the JSON document and trailing newline."""
        path = os.path.join(self.temp_dir, "out.json")
        with open_output(path) as stream:
            write_json({"holds": True}, stream)

        with open(path, encoding="utf-8") as f:
            self.assertEqual(f.read(), '{\n  "holds": true\n}\n')

    def test_unwritable(self):
        """Test that an unwritable path raises ValueError."""
        with self.assertRaises(ValueError):
            with open_output(os.path.join(self.temp_dir, "missing", "out.json")):
                pass


if __name__ == "__main__":
    unittest.main()
