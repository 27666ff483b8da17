"""Run configuration and numeric defaults."""

import os
from dataclasses import dataclass
from typing import Literal, Optional

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFAULT_WINDOW = 64
DEFAULT_HORIZON = 512
DEFAULT_ENUMERATION_CAP = 1_000_000
DEFAULT_EXPANSION_CAP = 200_000
DEFAULT_EPSILON_HORIZON_CAP = 100_000

# Entries above this are treated as diverging to +inf.
DIVERGENCE_THRESHOLD = 1e12

# Slack for ">= 0" / "<= 0" tests on sequences.
SIGN_SLACK = 1e-9

# Per-entry tolerance when matching cycles.
CYCLE_TOLERANCE = 1e-9

# Largest gap between a supplied limit function and the observed limsup of T^n(0).
AGREEMENT_TOLERANCE = 1e-8

PROBABILITY_TOLERANCE = 1e-9
RENORMALIZE_TOLERANCE = 1e-6

CAP_ENV_VAR = "GC_MDP_CAP"


def resolve_cap(default: int) -> int:
    """Return the cap from the environment, or the given default.

    Args:
        default: Cap used when ``GC_MDP_CAP`` is unset

    Returns:
        The effective cap

    Raises:
        ValueError: If ``GC_MDP_CAP`` is not a positive integer
    """
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}")
    if value <= 0:
        raise ValueError(f"{CAP_ENV_VAR} must be positive, got {value}")
    return value


@dataclass
class RunConfig:
    """Settings shared by the command-line commands.

    Attributes:
        tolerance: Sup-norm tolerance for convergence detection
        max_iter: Iteration cap for value iteration
        window: Trailing window width for cycle detection
        horizon: Horizon for lazy models and liminf/limsup estimation
        output: Output path, or None for stdout
        format: Output format for traces and reports
        seed: Seed for the random model generator
        full_trace: Keep every iterate instead of thinning
        thin: Keep every thin-th iterate when thinning
    """

    tolerance: float = DEFAULT_TOLERANCE
    max_iter: int = DEFAULT_MAX_ITER
    window: int = DEFAULT_WINDOW
    horizon: int = DEFAULT_HORIZON
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    seed: int = 0
    full_trace: bool = False
    thin: int = 10

    def __post_init__(self):
        """Validate the configuration values."""
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.window < 2:
            raise ValueError("window must be at least 2")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be 'json' or 'csv'")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")

    @property
    def keep_every(self) -> int:
        """Thinning stride for traces."""
        return 1 if self.full_trace else self.thin
