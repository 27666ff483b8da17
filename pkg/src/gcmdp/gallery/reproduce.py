"""Re-run the expectations of gallery entries and report mismatches."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from numbers import Number
from typing import Any, Dict, Iterable, List, Optional

from gcmdp.gallery.examples import GalleryEntry, get_entry, list_entries

logger = logging.getLogger(__name__)


@dataclass
class CheckOutcome:
    """Result of one expectation.

    Attributes:
        name: Expectation name
        passed: Whether the computed value matched
        expected: The known value
        actual: The computed value, or None when computing failed
        provenance: Where the known value comes from
        differences: Human-readable mismatch lines
    """

    name: str
    passed: bool
    expected: Any
    actual: Any
    provenance: str
    differences: List[str] = field(default_factory=list)


@dataclass
class Reproduction:
    """All outcomes for one gallery entry."""

    entry_id: str
    outcomes: List[CheckOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    def failures(self) -> List[CheckOutcome]:
        return [outcome for outcome in self.outcomes if not outcome.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "entry": self.entry_id,
            "passed": self.passed,
            "checks": [
                {
                    "name": o.name,
                    "passed": o.passed,
                    "provenance": o.provenance,
                    "differences": o.differences,
                }
                for o in self.outcomes
            ],
        }


def _is_number(value: Any) -> bool:
    return isinstance(value, Number) and not isinstance(value, bool)


def compare(expected: Any, actual: Any, tol: float, path: str = "") -> List[str]:
    """List the differences between a known and a computed value.

    Numbers match within tol, infinities must coincide, mappings and
    sequences match elementwise; anything else must be equal.
    """
    where = path or "value"
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return [f"{where}: expected a mapping, got {actual!r}"]
        lines = []
        for key in sorted(set(expected) | set(actual), key=str):
            if key not in actual:
                lines.append(f"{where}[{key!r}]: missing")
            elif key not in expected:
                lines.append(f"{where}[{key!r}]: unexpected")
            else:
                lines.extend(compare(expected[key], actual[key], tol, f"{where}[{key!r}]"))
        return lines
    if isinstance(expected, (list, tuple)):
        if not isinstance(actual, (list, tuple)) or len(actual) != len(expected):
            return [f"{where}: expected {expected!r}, got {actual!r}"]
        lines = []
        for index, (e, a) in enumerate(zip(expected, actual)):
            lines.extend(compare(e, a, tol, f"{where}[{index}]"))
        return lines
    if _is_number(expected) and _is_number(actual):
        e, a = float(expected), float(actual)
        if math.isinf(e) or math.isinf(a):
            ok = e == a
        else:
            ok = abs(e - a) <= tol
        return [] if ok else [f"{where}: expected {e!r}, got {a!r}"]
    if expected != actual:
        return [f"{where}: expected {expected!r}, got {actual!r}"]
    return []


def reproduce_entry(entry: GalleryEntry, horizon: Optional[int] = None) -> Reproduction:
    """Compute every expectation of an entry on its materialized model."""
    mdp = entry.materialize(horizon)
    result = Reproduction(entry.id)
    for name, expectation in entry.expected.items():
        expected = expectation.expected_for(mdp)
        try:
            actual = expectation.compute(mdp)
        except ValueError as e:
            logger.warning("%s/%s failed: %s", entry.id, name, e)
            result.outcomes.append(
                CheckOutcome(name, False, expected, None, expectation.provenance, [str(e)])
            )
            continue
        differences = compare(expected, actual, expectation.tolerance)
        result.outcomes.append(
            CheckOutcome(
                name, not differences, expected, actual, expectation.provenance, differences
            )
        )
    logger.info(
        "%s: %d/%d expectations reproduced",
        entry.id,
        sum(o.passed for o in result.outcomes),
        len(result.outcomes),
    )
    return result


def reproduce(entry_ids: Iterable[str], max_workers: Optional[int] = None) -> List[Reproduction]:
    """Reproduce several entries concurrently; "all" expands to every entry.

    Raises:
        KeyError: If an identifier is unknown
    """
    ids = list(entry_ids)
    if "all" in ids:
        ids = list_entries()
    entries = [get_entry(entry_id) for entry_id in ids]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(reproduce_entry, entries))
