"""Hazard-rate models with an absorbing positive floor.

The hazard rate lambda follows the diffusion

    d(lambda_t) = a(lambda_t, t) dt + b(t) (lambda_t - floor) dW_t,

so that trajectories started above the floor stay above it.  Three
parameterizations are supported:

* ``ConstantHazard`` -- a == 0, b == 0; every level is a fixed point.
* ``DeterministicExponential`` -- a = c (lambda - floor), b == 0; the hazard
  relaxes exponentially away from (or toward) the floor.
* ``ShiftedLogOU`` -- y = ln(lambda - floor) is an Ornstein-Uhlenbeck process
  with mean ``theta``, reversion speed ``kappa_y`` and volatility ``b0``, so
  a = (lambda - floor) (kappa_y (theta - y) + b0^2 / 2) and b(t) = b0.

All operations are pure functions of immutable values and accept scalars or
numpy arrays for the hazard argument.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError
from .validation import check_scalar

ArrayLike = Union[float, np.ndarray]

#: Smallest admissible volatility level for the stochastic kind.  The theory
#: needs b(t) bounded away from zero; this is the package-wide bound.
MIN_STOCHASTIC_VOL = 1e-3

#: Width of the near-floor band on which drift positivity is checked.
DEFAULT_FLOOR_BAND = 1e-2


class HazardKind(enum.Enum):
    CONSTANT = "constant"
    DETERMINISTIC_EXPONENTIAL = "deterministic_exponential"
    SHIFTED_LOG_OU = "shifted_log_ou"


@dataclass(frozen=True)
class ConstantHazardParams:
    """A hazard rate frozen at ``lambda0``; zero drift, zero volatility."""

    lambda0: float


@dataclass(frozen=True)
class DeterministicExponentialParams:
    """Deterministic hazard lambda(t) = floor + (lambda0 - floor) e^{c t}."""

    lambda0: float
    growth: float


@dataclass(frozen=True)
class ShiftedLogOUParams:
    """OU dynamics for y = ln(lambda - floor).

    ``theta`` is the long-run mean of y, ``kappa_y`` the reversion speed and
    ``b0`` the volatility.  ``drift_vol`` is the volatility level used inside
    the drift term; it defaults to ``b0`` and exists so that two models can
    share an identical drift while differing in diffusion (the hypothesis of
    the volatility-comparison checks).
    """

    theta: float
    kappa_y: float
    b0: float
    drift_vol: float | None = None

    @property
    def effective_drift_vol(self) -> float:
        return self.b0 if self.drift_vol is None else self.drift_vol


@dataclass(frozen=True)
class HazardModel:
    kind: HazardKind
    lambda_floor: float
    params: ConstantHazardParams | DeterministicExponentialParams | ShiftedLogOUParams

    def __post_init__(self):
        check_scalar(self.lambda_floor, "lambda_floor", minimum=0.0)
        if self.kind is HazardKind.SHIFTED_LOG_OU:
            if self.lambda_floor <= 0.0:
                raise ConfigError("shifted_log_ou requires lambda_floor > 0")
            p = self.params
            if not isinstance(p, ShiftedLogOUParams):
                raise ConfigError("shifted_log_ou requires ShiftedLogOUParams")
            check_scalar(p.kappa_y, "kappa_y", minimum=0.0)
            check_scalar(p.b0, "b0", minimum=MIN_STOCHASTIC_VOL)
            if p.drift_vol is not None:
                check_scalar(p.drift_vol, "drift_vol", minimum=0.0)
        elif self.kind is HazardKind.CONSTANT:
            if not isinstance(self.params, ConstantHazardParams):
                raise ConfigError("constant hazard requires ConstantHazardParams")
            check_scalar(self.params.lambda0, "lambda0",
                         minimum=self.lambda_floor, strict_min=True)
        elif self.kind is HazardKind.DETERMINISTIC_EXPONENTIAL:
            if not isinstance(self.params, DeterministicExponentialParams):
                raise ConfigError(
                    "deterministic_exponential requires DeterministicExponentialParams")
            check_scalar(self.params.lambda0, "lambda0",
                         minimum=self.lambda_floor, strict_min=True)
            check_scalar(self.params.growth, "growth")
        else:  # pragma: no cover - enum is closed
            raise ConfigError(f"unknown hazard kind {self.kind!r}")

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def constant(cls, lambda0: float, lambda_floor: float = 0.0) -> "HazardModel":
        return cls(HazardKind.CONSTANT, lambda_floor, ConstantHazardParams(lambda0))

    @classmethod
    def deterministic_exponential(cls, lambda0: float, growth: float,
                                  lambda_floor: float = 0.0) -> "HazardModel":
        return cls(HazardKind.DETERMINISTIC_EXPONENTIAL, lambda_floor,
                   DeterministicExponentialParams(lambda0, growth))

    @classmethod
    def shifted_log_ou(cls, theta: float, kappa_y: float, b0: float,
                       lambda_floor: float, drift_vol: float | None = None) -> "HazardModel":
        return cls(HazardKind.SHIFTED_LOG_OU, lambda_floor,
                   ShiftedLogOUParams(theta, kappa_y, b0, drift_vol))

    # ------------------------------------------------------------------
    # basic properties

    @property
    def is_deterministic(self) -> bool:
        """True when the diffusion coefficient is identically zero."""
        return self.kind is not HazardKind.SHIFTED_LOG_OU

    def vol_level(self, t: float = 0.0) -> float:
        """The volatility multiplier b(t)."""
        if self.kind is HazardKind.SHIFTED_LOG_OU:
            return self.params.b0
        return 0.0

    # ------------------------------------------------------------------
    # diffusion coefficients

    def _require_above_floor(self, lam: ArrayLike) -> np.ndarray:
        arr = np.asarray(lam, dtype=float)
        if np.any(arr <= self.lambda_floor):
            raise ValueError(
                f"hazard must exceed the floor {self.lambda_floor}; got "
                f"minimum {np.min(arr)}")
        return arr

    def drift(self, lam: ArrayLike, t: float = 0.0) -> ArrayLike:
        """Drift a(lambda, t).  Rejects lambda at or below the floor."""
        arr = self._require_above_floor(lam)
        gap = arr - self.lambda_floor
        if self.kind is HazardKind.CONSTANT:
            out = np.zeros_like(gap)
        elif self.kind is HazardKind.DETERMINISTIC_EXPONENTIAL:
            out = self.params.growth * gap
        else:
            p = self.params
            y = np.log(gap)
            out = gap * (p.kappa_y * (p.theta - y)
                         + 0.5 * p.effective_drift_vol ** 2)
        return float(out) if np.isscalar(lam) else out

    def vol(self, lam: ArrayLike, t: float = 0.0) -> ArrayLike:
        """Diffusion coefficient b(t) (lambda - floor); zero exactly at the floor."""
        arr = np.asarray(lam, dtype=float)
        if np.any(arr < self.lambda_floor):
            raise ValueError(f"hazard below the floor {self.lambda_floor}")
        out = self.vol_level(t) * (arr - self.lambda_floor)
        return float(out) if np.isscalar(lam) else out

    def drift_deriv(self, lam: ArrayLike, t: float = 0.0) -> ArrayLike:
        """Analytic d a / d lambda."""
        arr = self._require_above_floor(lam)
        gap = arr - self.lambda_floor
        if self.kind is HazardKind.CONSTANT:
            out = np.zeros_like(gap)
        elif self.kind is HazardKind.DETERMINISTIC_EXPONENTIAL:
            out = np.full_like(gap, self.params.growth)
        else:
            p = self.params
            y = np.log(gap)
            out = (p.kappa_y * (p.theta - y)
                   + 0.5 * p.effective_drift_vol ** 2 - p.kappa_y)
        return float(out) if np.isscalar(lam) else out

    def drift_y(self, y: ArrayLike, t: float = 0.0) -> ArrayLike:
        """Drift of y = ln(lambda - floor): a / (lambda - floor) - b(t)^2 / 2."""
        arr = np.asarray(y, dtype=float)
        if self.kind is HazardKind.CONSTANT:
            out = np.zeros_like(arr)
        elif self.kind is HazardKind.DETERMINISTIC_EXPONENTIAL:
            out = np.full_like(arr, self.params.growth)
        else:
            p = self.params
            out = (p.kappa_y * (p.theta - arr)
                   + 0.5 * (p.effective_drift_vol ** 2 - p.b0 ** 2))
        return float(out) if np.isscalar(y) else out


# ----------------------------------------------------------------------
# structural validation


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str
    worst_lambda: float | None = None
    worst_t: float | None = None
    value: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    checks: tuple[ValidationCheck, ...]
    growth_constant_drift: float = math.nan
    growth_constant_drift_deriv: float = math.nan

    @property
    def first_failure(self) -> ValidationCheck | None:
        for c in self.checks:
            if not c.passed:
                return c
        return None

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok" if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name}: {c.detail}")
        return "\n".join(lines)


#: Blow-up detection only looks at tail nodes |y| >= this; nearer the origin
#: the growth bounds themselves kink and bounded ratios mimic growth.
_TAIL_START = 2.0


def _tail_blowup(ys: np.ndarray, ratios: np.ndarray, run: int,
                 min_slope: float, min_growth: float) -> bool:
    """Geometric growth of the ratio into the boundary at the END of the
    given (boundary-last) tail segment."""
    if ys.size < run or np.any(ratios <= 0.0):
        return False
    log_r = np.log(ratios)
    edge_r = log_r[-run:]
    edge_y = ys[-run:]
    slope = abs(np.polyfit(edge_y, edge_r, 1)[0])
    growth = ratios[-1] / ratios[0]
    return bool(np.all(np.diff(edge_r) > 0) and slope >= min_slope
                and growth >= min_growth)


def _boundary_blowup(ys: np.ndarray, ratios: np.ndarray, run: int = 20,
                     min_slope: float = 0.5, min_growth: float = 5.0) -> bool:
    """Detect a growth-bound ratio with no finite constant on the region.

    A ratio admitting no finite bound grows geometrically into a grid
    boundary: on the tail segment (|y| >= 2, where the bounds are smooth)
    it increases monotonically into the boundary with log-slope at least
    ``min_slope`` per log-unit and total growth at least ``min_growth``
    across the segment.  Admissible models' ratios flatten in the tails.
    A window too narrow to reach a tail cannot establish divergence there.
    """
    lower = ys <= -_TAIL_START
    if np.count_nonzero(lower) >= run:
        if _tail_blowup(ys[lower][::-1], ratios[lower][::-1], run,
                        min_slope, min_growth):
            return True
    upper = ys >= _TAIL_START
    if np.count_nonzero(upper) >= run:
        if _tail_blowup(ys[upper], ratios[upper], run, min_slope, min_growth):
            return True
    return False


def validate(model: HazardModel, alpha: float, grid,
             floor_band: float = DEFAULT_FLOOR_BAND) -> ValidationReport:
    """Check the structural assumptions the pricing theory relies on.

    Verifies on the grid nodes that

    * 0 <= alpha <= sqrt(lambda_floor),
    * the drift is positive on the near-floor band (stochastic kind; the
      deterministic kinds cannot reach the floor so the requirement is
      vacuous for them),
    * |a| <= K (lambda - floor) (1 + |ln(lambda - floor)|) for a finite K,
    * |da/dlambda| <= K (1 + ln^2(lambda - floor)) for a finite K.

    The two growth checks record the smallest constant that works on the
    sampled nodes and fail only when the ratio blows up monotonically into a
    grid boundary, i.e. when no finite constant could work.
    """
    checks: list[ValidationCheck] = []
    lambdas = np.asarray(grid.lambdas, dtype=float)
    horizon = float(grid.horizon)
    t_samples = (0.0, 0.5 * horizon, horizon)

    sqrt_floor = math.sqrt(model.lambda_floor)
    alpha_ok = 0.0 <= alpha <= sqrt_floor
    detail = (f"alpha={alpha:g} within [0, sqrt(lambda_floor)]={sqrt_floor:g}"
              if alpha_ok else "alpha exceeds sqrt(lambda_floor)"
              if alpha > sqrt_floor else "alpha is negative")
    checks.append(ValidationCheck("alpha_range", alpha_ok, detail, value=alpha))

    gap = lambdas - model.lambda_floor
    band = gap < floor_band
    if model.is_deterministic:
        positivity_ok = True
        detail = "deterministic hazard cannot reach the floor"
        worst = (None, None, None)
    else:
        positivity_ok = True
        worst = (None, None, None)
        for t in t_samples:
            a = model.drift(lambdas[band], t)
            if np.any(a <= 0.0):
                positivity_ok = False
                j = int(np.argmin(a))
                worst = (float(lambdas[band][j]), t, float(a[j]))
                break
        detail = (f"drift > 0 on the band lambda - floor < {floor_band:g}"
                  if positivity_ok else
                  f"drift {worst[2]:g} <= 0 at lambda={worst[0]:g}, t={worst[1]:g}")
    checks.append(ValidationCheck("drift_positive_near_floor", positivity_ok,
                                  detail, worst[0], worst[1], worst[2]))

    y = np.log(gap)
    bound_drift = gap * (1.0 + np.abs(y))
    bound_deriv = 1.0 + y ** 2
    k_drift = 0.0
    k_deriv = 0.0
    drift_ok = True
    deriv_ok = True
    worst_drift = (None, None)
    worst_deriv = (None, None)
    for t in t_samples:
        r1 = np.abs(model.drift(lambdas, t)) / bound_drift
        r2 = np.abs(model.drift_deriv(lambdas, t)) / bound_deriv
        if r1.max() > k_drift:
            k_drift = float(r1.max())
            worst_drift = (float(lambdas[np.argmax(r1)]), t)
        if r2.max() > k_deriv:
            k_deriv = float(r2.max())
            worst_deriv = (float(lambdas[np.argmax(r2)]), t)
        drift_ok = drift_ok and not _boundary_blowup(y, r1)
        deriv_ok = deriv_ok and not _boundary_blowup(y, r2)
    checks.append(ValidationCheck(
        "drift_growth_bound", drift_ok,
        f"smallest constant on grid: {k_drift:.6g}" if drift_ok else
        "ratio blows up at a grid boundary; no finite constant works",
        worst_drift[0], worst_drift[1], k_drift))
    checks.append(ValidationCheck(
        "drift_deriv_growth_bound", deriv_ok,
        f"smallest constant on grid: {k_deriv:.6g}" if deriv_ok else
        "ratio blows up at a grid boundary; no finite constant works",
        worst_deriv[0], worst_deriv[1], k_deriv))

    passed = all(c.passed for c in checks)
    return ValidationReport(passed, tuple(checks), k_drift, k_deriv)
