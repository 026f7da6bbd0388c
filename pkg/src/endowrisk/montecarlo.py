"""Independent Monte Carlo estimators for the survival quantities.

Paths are simulated in the y = ln(lambda - floor) coordinate, so positivity
above the floor holds pathwise by construction.  Under the tilted measure the
y-drift is shifted by -alpha b(t), the hazard analog of a market price of
risk.  Random numbers come from counter-based streams keyed by
(seed, pair index): results are reproducible bit for bit for a fixed seed and
independent of how work is split across threads.

This module never feeds the solver; it exists as the independent oracle the
verification suite compares against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .hazard import HazardModel
from .parallel import map_tasks
from .validation import check_int, check_scalar

_BLOCK_PAIRS = 2048


class Measure(enum.Enum):
    PHYSICAL = "physical"
    ALPHA_TILTED = "alpha_tilted"


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 200_000
    steps_per_year: int = 250
    seed: int = 0
    antithetic: bool = True
    measure: Measure = Measure.PHYSICAL

    def __post_init__(self):
        check_int(self.n_paths, "n_paths", minimum=100)
        check_int(self.steps_per_year, "steps_per_year", minimum=10)
        check_int(self.seed, "seed", minimum=0)
        if self.antithetic and self.n_paths % 2:
            raise ConfigError("antithetic sampling requires an even n_paths")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    n_paths: int
    config: McConfig


def _n_steps(t0: float, horizon: float, config: McConfig) -> int:
    span = horizon - t0
    if span <= 0:
        raise ConfigError(f"empty simulation window [{t0}, {horizon}]")
    return max(config.steps_per_year, int(math.ceil(span * config.steps_per_year)))


def _pair_normals(seed: int, pair_index: int, n_steps: int) -> np.ndarray:
    """The Gaussian increments of one antithetic pair, from its own stream."""
    key = np.array([seed, pair_index], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal(n_steps)


def _y0(model: HazardModel, lambda0: float) -> float:
    if lambda0 <= model.lambda_floor:
        raise ConfigError(
            f"lambda0={lambda0} must exceed the floor {model.lambda_floor}")
    return math.log(lambda0 - model.lambda_floor)


def _tilt(model: HazardModel, measure: Measure, alpha: float, t: float) -> float:
    if measure is Measure.ALPHA_TILTED:
        return alpha * model.vol_level(t)
    return 0.0


def simulate_hazard_path(model: HazardModel, lambda0: float, measure: Measure,
                         t0: float, horizon: float, config: McConfig,
                         path_index: int, alpha: float = 0.0) -> np.ndarray:
    """One Euler path of lambda on the step grid, endpoints included.

    The path is the one the estimators consume: with antithetic sampling on,
    paths 2i and 2i+1 share the draws of pair i with opposite signs.
    """
    check_int(path_index, "path_index", minimum=0)
    n_steps = _n_steps(t0, horizon, config)
    dt = (horizon - t0) / n_steps
    sqrt_dt = math.sqrt(dt)
    if config.antithetic:
        pair, sign = divmod(path_index, 2)
        z = _pair_normals(config.seed, pair, n_steps)
        if sign:
            z = -z
    else:
        z = _pair_normals(config.seed, path_index, n_steps)
    y = _y0(model, lambda0)
    out = np.empty(n_steps + 1)
    out[0] = lambda0
    for k in range(n_steps):
        t = t0 + k * dt
        mu = model.drift_y(y, t) - _tilt(model, measure, alpha, t)
        y = y + mu * dt + model.vol_level(t) * sqrt_dt * z[k]
        out[k + 1] = model.lambda_floor + math.exp(y)
    return out


def _survival_block(model: HazardModel, lambda0: float, measure: Measure,
                    alpha: float, t0: float, horizon: float, config: McConfig,
                    pair_lo: int, pair_hi: int, n_steps: int) -> np.ndarray:
    """Conditional survival exp(-int lambda) for stream units
    [pair_lo, pair_hi).

    With antithetic sampling each unit is a pair sharing one stream with
    opposite signs (shape (n, 2)); otherwise each unit is a single path on
    its own stream (shape (n, 1)).
    """
    n = pair_hi - pair_lo
    dt = (horizon - t0) / n_steps
    sqrt_dt = math.sqrt(dt)
    z = np.empty((n, n_steps))
    for i in range(n):
        z[i] = _pair_normals(config.seed, pair_lo + i, n_steps)

    y0 = _y0(model, lambda0)
    floor = model.lambda_floor
    signs = (1.0, -1.0) if config.antithetic else (1.0,)
    out = np.empty((n, len(signs)))
    for col, sign in enumerate(signs):
        y = np.full(n, y0)
        lam = np.full(n, lambda0)
        integral = np.zeros(n)
        for k in range(n_steps):
            t = t0 + k * dt
            mu = model.drift_y(y, t) - _tilt(model, measure, alpha, t)
            y = y + mu * dt + model.vol_level(t) * sqrt_dt * (sign * z[:, k])
            lam_next = floor + np.exp(y)
            integral += 0.5 * (lam + lam_next) * dt
            lam = lam_next
        out[:, col] = np.exp(-integral)
    return out


def _survival_samples(model: HazardModel, lambda0: float, measure: Measure,
                      alpha: float, t0: float, horizon: float,
                      config: McConfig) -> np.ndarray:
    """All per-path survival values, shape (n_units, width).

    Rows are stream units (pairs when antithetic); assembly order is by
    index, so the result is independent of the thread count.
    """
    n_steps = _n_steps(t0, horizon, config)
    if config.antithetic:
        n_units, width = config.n_paths // 2, 2
    else:
        n_units, width = config.n_paths, 1
    out = np.empty((n_units, width))
    blocks = [(lo, min(lo + _BLOCK_PAIRS, n_units))
              for lo in range(0, n_units, _BLOCK_PAIRS)]

    def run(block):
        lo, hi = block
        out[lo:hi] = _survival_block(model, lambda0, measure, alpha, t0,
                                     horizon, config, lo, hi, n_steps)

    map_tasks(run, blocks)
    return out


def _estimate_from_units(units: np.ndarray, config: McConfig) -> McEstimate:
    """Mean and standard error over iid stream units (pair means when
    antithetic); numpy's pairwise summation keeps the reduction exact for a
    given array regardless of threading."""
    unit_means = units.mean(axis=1)
    n = unit_means.size
    mean = float(unit_means.mean())
    se = float(unit_means.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean, se, config.n_paths, config)


def mc_phi_physical(model: HazardModel, lambda0: float, t: float,
                    horizon: float, config: McConfig) -> McEstimate:
    """E[exp(-int_t^T lambda_s ds)] under the physical measure."""
    if config.measure is not Measure.PHYSICAL:
        raise ConfigError("mc_phi_physical requires the physical measure")
    units = _survival_samples(model, lambda0, Measure.PHYSICAL, 0.0, t,
                              horizon, config)
    return _estimate_from_units(units, config)


def mc_beta(model: HazardModel, alpha: float, lambda0: float, t: float,
            horizon: float, config: McConfig) -> McEstimate:
    """Tilted-measure expectation of the survival integral; the estimator of
    the large-portfolio per-risk limit."""
    if config.measure is not Measure.ALPHA_TILTED:
        raise ConfigError("mc_beta requires the alpha-tilted measure")
    check_scalar(alpha, "alpha", minimum=0.0)
    units = _survival_samples(model, lambda0, Measure.ALPHA_TILTED, alpha, t,
                              horizon, config)
    return _estimate_from_units(units, config)


@dataclass(frozen=True)
class SurvivorPremium:
    """Static standard-deviation premium for n conditionally iid lives.

    ``per_risk`` is H/n = E p + alpha sqrt(Var(p) + E[p(1-p)]/n) where p is
    the hazard-conditional survival probability; ``limit`` is its n -> infty
    value E p + alpha sqrt(Var(p)).
    """

    n: int
    mean_survival: float
    var_conditional_mean: float
    mean_conditional_var: float
    per_risk: float
    limit: float
    per_risk_se: float
    config: McConfig


def mc_survivor_premium(model: HazardModel, n: int, alpha: float, t: float,
                        horizon: float, config: McConfig,
                        lambda0: float) -> SurvivorPremium:
    """Static premium comparator from simulated conditional survival.

    The variance of the survivor count splits into n^2 Var(p) (hazard risk)
    plus n E[p(1-p)] (finite-portfolio risk); the premium per risk follows
    from the standard-deviation principle applied to the total.
    """
    check_int(n, "n", minimum=1)
    check_scalar(alpha, "alpha", minimum=0.0)
    if config.measure is not Measure.PHYSICAL:
        raise ConfigError("the static premium is computed under the physical measure")
    p = _survival_samples(model, lambda0, Measure.PHYSICAL, 0.0, t, horizon,
                          config)

    # Per-unit (pair) means of the three ingredient moments; units are iid.
    a = p.mean(axis=1)                      # p
    b = (p * p).mean(axis=1)                # p^2
    c = (p * (1.0 - p)).mean(axis=1)        # p (1 - p)
    mean_p = float(a.mean())
    mean_pq = float(c.mean())
    # deviation form: exactly zero for deterministic hazards, where the
    # moment difference E[p^2] - (E p)^2 cancels catastrophically
    var_p = float(np.mean((p - mean_p) ** 2))

    def premium(var_weight: float) -> float:
        return mean_p + alpha * math.sqrt(max(var_p + var_weight * mean_pq, 0.0))

    per_risk = premium(1.0 / n)
    limit = premium(0.0)

    # Delta-method standard error of H/n from the unit-level moment samples.
    m = a.size
    if m > 1:
        cov = np.cov(np.vstack([a, b, c]))
        root = math.sqrt(max(var_p + mean_pq / n, 1e-300))
        grad = np.array([
            1.0 + alpha * (-mean_p) / root,
            alpha * 0.5 / root,
            alpha * 0.5 / (n * root),
        ])
        se = float(math.sqrt(max(grad @ cov @ grad, 0.0) / m))
    else:
        se = 0.0
    return SurvivorPremium(n, mean_p, var_p, mean_pq, per_risk, limit, se, config)
