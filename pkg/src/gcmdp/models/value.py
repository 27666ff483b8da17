"""Extended-real value functions."""

import math
from typing import Iterable, Iterator, List, Sequence, Union

import numpy as np

Number = Union[int, float]


class ValueFn:
    """State-indexed vector of finite reals or +inf.

    Instances are immutable: the underlying array is read-only. -inf and NaN
    are rejected at construction.

    Attributes:
        _values: Read-only float array of length n_states
    """

    __slots__ = ("_values",)

    def __init__(self, values: Union[Sequence[Number], np.ndarray]):
        """Initialize a value function.

        Args:
            values: One entry per state, each finite or +inf

        Raises:
            ValueError: If an entry is -inf or NaN
        """
        array = np.array(values, dtype=float).reshape(-1)
        if np.isnan(array).any():
            raise ValueError("value function contains NaN")
        if np.isneginf(array).any():
            raise ValueError("value function contains -inf")
        array.setflags(write=False)
        self._values = array

    @classmethod
    def zeros(cls, n_states: int) -> "ValueFn":
        """Return the zero function on n_states states."""
        return cls(np.zeros(n_states))

    @classmethod
    def constant(cls, n_states: int, value: float) -> "ValueFn":
        """Return a constant function on n_states states."""
        return cls(np.full(n_states, float(value)))

    @property
    def values(self) -> np.ndarray:
        """Get the read-only value array."""
        return self._values

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, index: int) -> float:
        return float(self._values[index])

    def __iter__(self) -> Iterator[float]:
        return iter(float(v) for v in self._values)

    def __repr__(self) -> str:
        return f"ValueFn({self.to_list()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValueFn):
            return NotImplemented
        return bool(np.array_equal(self._values, other._values))

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    @property
    def finite_mask(self) -> np.ndarray:
        """Boolean mask of finite entries."""
        return np.isfinite(self._values)

    def is_finite(self) -> bool:
        """Check whether every entry is finite."""
        return bool(self.finite_mask.all())

    def allclose(self, other: "ValueFn", tol: float) -> bool:
        """Compare two functions entrywise.

        +inf entries must coincide exactly; finite entries must agree within
        tol (absolute).

        Args:
            other: The function to compare against
            tol: Absolute tolerance on finite entries

        Returns:
            True if the functions agree
        """
        return distance(self._values, other.values) <= tol

    def to_list(self) -> List[Union[float, str]]:
        """Serialize entries, writing +inf as the string "inf"."""
        return [encode_number(v) for v in self._values]

    @classmethod
    def from_list(cls, items: Iterable[Union[Number, str]]) -> "ValueFn":
        """Inverse of to_list."""
        return cls([decode_number(v) for v in items])


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sup-norm distance over finite entries; inf if the +inf patterns differ."""
    inf_a = np.isinf(a)
    inf_b = np.isinf(b)
    if not np.array_equal(inf_a, inf_b):
        return math.inf
    finite = ~inf_a
    if not finite.any():
        return 0.0
    return float(np.max(np.abs(a[finite] - b[finite])))


def encode_number(value: float) -> Union[float, str]:
    """Encode a float for JSON, writing +inf as "inf" and -inf as "-inf"."""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def decode_number(value: Union[Number, str]) -> float:
    """Decode a number written by encode_number.

    Raises:
        ValueError: If the value is neither a number nor "inf"/"-inf"
    """
    if isinstance(value, str):
        if value == "inf":
            return math.inf
        if value == "-inf":
            return -math.inf
        raise ValueError(f"expected a number, 'inf' or '-inf', got {value!r}")
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)
