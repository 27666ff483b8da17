"""Trace CSV and JSON output for the command-line interface."""

import csv
import json
import sys
from contextlib import contextmanager
from typing import IO, Any, Iterator, List, Optional, Tuple

from gcmdp.models.mdp import Mdp
from gcmdp.models.value import ValueFn, decode_number
from gcmdp.solvers.trace import ConvergenceTrace


def format_number(value: float) -> str:
    """Decimal with 17 significant digits, or "inf"."""
    if value == float("inf"):
        return "inf"
    return format(value, ".17g")


@contextmanager
def open_output(path: Optional[str]) -> Iterator[IO[str]]:
    """Yield the file at path, or stdout when path is None."""
    if path is None:
        yield sys.stdout
        return
    try:
        f = open(path, "w", encoding="utf-8", newline="")
    except OSError as e:
        raise ValueError(f"Error opening output file: {str(e)}")
    with f:
        yield f


def write_json(data: Any, stream: IO[str]) -> None:
    """Write a JSON document followed by a newline."""
    json.dump(data, stream, indent=2)
    stream.write("\n")


def write_trace_csv(trace: ConvergenceTrace, mdp: Mdp, stream: IO[str]) -> None:
    """Write one row "n, values..." per kept iterate."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["n", *mdp.state_ids])
    for n, iterate in zip(trace.indices, trace.iterates):
        writer.writerow([n, *(format_number(v) for v in iterate.values)])


def read_trace_csv(stream: IO[str]) -> Tuple[List[str], List[int], List[ValueFn]]:
    """Parse a trace CSV back into labels, iteration numbers and iterates.

    Raises:
        ValueError: If the header or a row is malformed
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty trace file")
    if not header or header[0] != "n":
        raise ValueError("trace header must start with 'n'")
    labels = header[1:]
    indices, iterates = [], []
    for line, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise ValueError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        indices.append(int(row[0]))
        iterates.append(ValueFn([decode_number(_number(cell)) for cell in row[1:]]))
    return labels, indices, iterates


def _number(cell: str):
    return cell if cell == "inf" else float(cell)
