"""The elementary square-root inequalities behind the comparison arguments.

Each function returns the margin (right side minus left side) of one
inequality under its stated hypotheses; the fuzzers sample random
hypothesis-satisfying inputs and report the worst margin.  These are the
exact algebraic facts the order-preservation proofs of the solver checks
lean on, so they are verified independently and exhaustively cheaply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .validation import check_int

FUZZ_SLACK = 1e-12


def sqrt_shift_margin(a: float, b: float, c: float) -> float:
    """Margin of sqrt(c^2 + a^2) <= (a - b) + sqrt(c^2 + b^2) for a >= b."""
    if a < b:
        raise ConfigError(f"hypothesis a >= b violated: a={a}, b={b}")
    return (a - b) + math.hypot(c, b) - math.hypot(c, a)


def split_bound_margin(a: float, b: float, c: float, b_l: float, c_l: float,
                       m: int, n: int) -> float:
    """Margin of the two-portfolio square-root split.

    Hypotheses: a >= c >= b >= 0 and integers m, n >= 0.  Asserts

        sqrt((b_l + c_l)^2 + (m + n) a^2) - sqrt(n) (a - c)
            <= sqrt(b_l^2 + m b^2) + sqrt(c_l^2 + n c^2) + sqrt(m) (a - b).
    """
    if not (a >= c >= b >= 0.0):
        raise ConfigError(f"hypothesis a >= c >= b >= 0 violated: {a}, {c}, {b}")
    check_int(m, "m", minimum=0)
    check_int(n, "n", minimum=0)
    lhs = math.hypot(b_l + c_l, math.sqrt(m + n) * a) - math.sqrt(n) * (a - c)
    rhs = (math.hypot(b_l, math.sqrt(m) * b) + math.hypot(c_l, math.sqrt(n) * c)
           + math.sqrt(m) * (a - b))
    return rhs - lhs


def per_risk_bound_margin(a: float, c: float, b_l: float, n: int) -> float:
    """Margin of the per-risk interpolation bound.

    Hypotheses: n >= 2 and a >= c >= 0.  Asserts

        sqrt(b_l^2 + c^2 / n)
            <= sqrt(n - 2) (a - c)
               + sqrt(b_l^2 + ((n - 1) c - (n - 2) a)^2 / (n - 1)).
    """
    check_int(n, "n", minimum=2)
    if not (a >= c >= 0.0):
        raise ConfigError(f"hypothesis a >= c >= 0 violated: a={a}, c={c}")
    lhs = math.hypot(b_l, c / math.sqrt(n))
    mix = ((n - 1) * c - (n - 2) * a) / math.sqrt(n - 1)
    rhs = math.sqrt(n - 2) * (a - c) + math.hypot(b_l, mix)
    return rhs - lhs


@dataclass(frozen=True)
class FuzzResult:
    name: str
    n_samples: int
    worst_margin: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _sample_scale(rng: np.random.Generator) -> float:
    # the inequalities are homogeneous, so small-to-moderate scales lose no
    # generality while keeping the absolute slack resolvable in float64
    return float(10.0 ** rng.uniform(-6, 1))


def fuzz_sqrt_shift(seed: int, n_samples: int) -> FuzzResult:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 5], np.uint64)))
    worst = math.inf
    violations = 0
    for _ in range(n_samples):
        s = _sample_scale(rng)
        b = rng.uniform(-1.0, 1.0) * s
        a = b + rng.uniform(0.0, 2.0) * s
        c = rng.uniform(-1.0, 1.0) * s
        margin = sqrt_shift_margin(a, b, c)
        worst = min(worst, margin)
        if margin < -FUZZ_SLACK:
            violations += 1
    return FuzzResult("sqrt_shift", n_samples, worst, violations)


def fuzz_split_bound(seed: int, n_samples: int) -> FuzzResult:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 10], np.uint64)))
    worst = math.inf
    violations = 0
    for _ in range(n_samples):
        s = _sample_scale(rng)
        b = rng.uniform(0.0, 1.0) * s
        c = b + rng.uniform(0.0, 1.0) * s
        a = c + rng.uniform(0.0, 1.0) * s
        b_l = rng.uniform(-1.0, 1.0) * s
        c_l = rng.uniform(-1.0, 1.0) * s
        m = int(rng.integers(0, 200))
        n = int(rng.integers(0, 200))
        margin = split_bound_margin(a, b, c, b_l, c_l, m, n)
        worst = min(worst, margin)
        if margin < -FUZZ_SLACK:
            violations += 1
    return FuzzResult("split_bound", n_samples, worst, violations)


def fuzz_per_risk_bound(seed: int, n_samples: int) -> FuzzResult:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 12], np.uint64)))
    worst = math.inf
    violations = 0
    for _ in range(n_samples):
        s = _sample_scale(rng)
        c = rng.uniform(0.0, 1.0) * s
        a = c + rng.uniform(0.0, 1.0) * s
        b_l = rng.uniform(-1.0, 1.0) * s
        n = int(rng.integers(2, 500))
        margin = per_risk_bound_margin(a, c, b_l, n)
        worst = min(worst, margin)
        if margin < -FUZZ_SLACK:
            violations += 1
    return FuzzResult("per_risk_bound", n_samples, worst, violations)


def run_all_fuzzers(seed: int, n_samples: int) -> tuple[FuzzResult, ...]:
    return (fuzz_sqrt_shift(seed, n_samples),
            fuzz_split_bound(seed, n_samples),
            fuzz_per_risk_bound(seed, n_samples))
