"""Terminal-value solver for degenerate 1-D parabolic equations.

The solver works in transformed coordinates y = ln(lambda - floor) and
tau = horizon - t, where the degenerate (lambda - floor)^2 diffusion becomes
spatially constant:

    -u_tau + D(tau) u_yy + A(y, tau) u_y + R(y, tau) u + S(y, tau, u, u_y) = 0,

marched from the terminal data at tau = 0 up to tau = horizon.  Each step is
fully implicit: diffusion, first-order upwinded advection and the linear
reaction are folded into a banded system, while the remaining source S is
lagged and Picard-iterated to the implicit fixed point.  The scheme is
monotone (an M-matrix at every step), which is what makes order-comparison
properties of the continuous problem carry over to the discrete solution.

Boundary rows impose a zero first difference in y (the solution is flat in y
at both ends of the transformed domain); the domain is truncated wide enough
that the boundary error at interior evaluation points is negligible, which
the domain-doubling tests measure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .errors import (ConfigError, GridRangeError, NonFiniteValueError,
                     PicardDivergenceError)
from .validation import check_int, check_scalar

logger = logging.getLogger(__name__)

#: Picard iteration counts above this are logged as a warning.
PICARD_WARN_ITERS = 25

DEFAULT_N_Y = 401
DEFAULT_N_TAU = 2000
DEFAULT_Y_MARGIN = 4.0


@dataclass(frozen=True)
class Grid:
    """Uniform grid in (y, tau) with y = ln(lambda - lambda_floor)."""

    y_min: float
    y_max: float
    n_y: int
    horizon: float
    n_tau: int
    lambda_floor: float = 0.0

    def __post_init__(self):
        check_scalar(self.y_min, "y_min")
        check_scalar(self.y_max, "y_max")
        if not self.y_min < self.y_max:
            raise ConfigError(f"y_min={self.y_min} must be < y_max={self.y_max}")
        check_int(self.n_y, "n_y", minimum=3)
        check_int(self.n_tau, "n_tau", minimum=1)
        check_scalar(self.horizon, "horizon", minimum=0.0, strict_min=True)
        check_scalar(self.lambda_floor, "lambda_floor", minimum=0.0)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.n_y - 1)

    @property
    def dtau(self) -> float:
        return self.horizon / self.n_tau

    @cached_property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_y)

    @cached_property
    def taus(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_tau + 1)

    @cached_property
    def lambdas(self) -> np.ndarray:
        return self.lambda_floor + np.exp(self.ys)

    @cached_property
    def times(self) -> np.ndarray:
        """Calendar times matching the tau columns (t = horizon - tau)."""
        return self.horizon - self.taus

    @classmethod
    def for_floor(cls, lambda_floor: float, eval_lambdas: Sequence[float],
                  horizon: float, n_y: int = DEFAULT_N_Y, n_tau: int = DEFAULT_N_TAU,
                  margin: float = DEFAULT_Y_MARGIN) -> "Grid":
        """Build the default window for a hazard floor and evaluation points.

        For a positive floor the window starts from
        [ln(floor * 1e-3), ln(50 * floor)] and is widened so every evaluation
        point keeps at least ``margin`` log-units to each boundary.  For a
        zero floor the window comes from the evaluation points alone.
        """
        ys = [math.log(lam - lambda_floor) for lam in eval_lambdas
              if lam > lambda_floor]
        if not ys:
            raise ConfigError("at least one evaluation hazard above the floor "
                              "is required to size the grid")
        lo = min(ys) - margin
        hi = max(ys) + margin
        if lambda_floor > 0.0:
            lo = min(lo, math.log(lambda_floor * 1e-3))
            hi = max(hi, math.log(50.0 * lambda_floor))
        return cls(lo, hi, n_y, horizon, n_tau, lambda_floor)

    def refined(self, factor: int = 2) -> "Grid":
        """Same window with both spacings divided by ``factor``."""
        return Grid(self.y_min, self.y_max, (self.n_y - 1) * factor + 1,
                    self.horizon, self.n_tau * factor, self.lambda_floor)

    def y_of_lambda(self, lam: float) -> float:
        if lam <= self.lambda_floor:
            raise GridRangeError(
                f"lambda={lam} is at or below the floor {self.lambda_floor}")
        return math.log(lam - self.lambda_floor)


@dataclass(frozen=True)
class SolverConfig:
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    scheme: str = "fully_implicit_picard"
    upwinding: str = "first_order_upwind"

    def __post_init__(self):
        check_scalar(self.picard_tol, "picard_tol", minimum=0.0, strict_min=True)
        check_int(self.picard_max_iters, "picard_max_iters", minimum=1)
        if self.scheme != "fully_implicit_picard":
            raise ConfigError(f"unsupported scheme {self.scheme!r}")
        if self.upwinding != "first_order_upwind":
            raise ConfigError(f"unsupported upwinding {self.upwinding!r}")


@dataclass(frozen=True)
class NonlinearSource:
    """Coefficients of the transformed equation, split for the implicit step.

    ``diffusion``, ``advection`` and ``reaction`` enter the banded system
    implicitly; ``extra`` is the remaining source, evaluated on the lagged
    Picard iterate ``(u, p)`` with p the centered y-gradient.  ``extra``
    receives the time-level index ``k`` so recursion sources can read the
    matching column of a previously solved surface without interpolation.
    Set ``linear=True`` when ``extra`` does not depend on (u, p); the step
    then needs a single solve.  ``time_invariant=True`` lets the solver
    factor the banded matrix once for the whole march.
    """

    diffusion: Callable[[float], float]
    advection: Callable[[np.ndarray, float], np.ndarray]
    reaction: Callable[[np.ndarray, float], np.ndarray]
    extra: Callable[[int, float, np.ndarray, np.ndarray], np.ndarray] | None = None
    linear: bool = True
    time_invariant: bool = True


@dataclass(frozen=True)
class Surface:
    """A function of (lambda, t) stored as u(y_j, tau_k) on a shared grid."""

    grid: Grid
    values: np.ndarray  # shape (n_y, n_tau + 1)
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_y, self.grid.n_tau + 1):
            raise ConfigError(
                f"values shape {v.shape} does not match grid "
                f"({self.grid.n_y}, {self.grid.n_tau + 1})")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValueError(f"surface {self.name!r} has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn, name: str = "") -> "Surface":
        """Sample a callable of (lambda, t) on the grid nodes."""
        lam = grid.lambdas
        vals = np.empty((grid.n_y, grid.n_tau + 1))
        for k, t in enumerate(grid.times):
            vals[:, k] = fn(lam, t)
        return cls(grid, vals, name)

    def column(self, k: int) -> np.ndarray:
        return self.values[:, k]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, 0]

    def scaled(self, factor: float, name: str = "") -> "Surface":
        return Surface(self.grid, self.values * factor, name or self.name)

    def value_at_y(self, y: float, tau: float) -> float:
        """Bilinear interpolation in (y, tau); monotone between nodes."""
        g = self.grid
        if not g.y_min <= y <= g.y_max:
            raise GridRangeError(
                f"y={y:.6g} outside grid [{g.y_min:.6g}, {g.y_max:.6g}] "
                f"(lambda range [{g.lambdas[0]:.6g}, {g.lambdas[-1]:.6g}])")
        if not 0.0 <= tau <= g.horizon + 1e-12 * g.horizon:
            raise GridRangeError(f"tau={tau:.6g} outside [0, {g.horizon:.6g}]")
        tau = min(tau, g.horizon)
        k = min(int(tau / g.dtau), g.n_tau - 1)
        w = (tau - g.taus[k]) / g.dtau
        lo = np.interp(y, g.ys, self.values[:, k])
        hi = np.interp(y, g.ys, self.values[:, k + 1])
        return float((1.0 - w) * lo + w * hi)

    def value_at(self, lam: float, t: float) -> float:
        """Evaluate at a (hazard, calendar-time) point."""
        return self.value_at_y(self.grid.y_of_lambda(lam), self.grid.horizon - t)

    def to_csv(self, path) -> None:
        """Write columns y, lambda, tau, t, value (one row per node)."""
        g = self.grid
        with open(path, "w", newline="") as fh:
            fh.write("y,lambda,tau,t,value\n")
            for j, y in enumerate(g.ys):
                lam = g.lambdas[j]
                for k, tau in enumerate(g.taus):
                    fh.write(f"{y:.17g},{lam:.17g},{tau:.17g},"
                             f"{g.times[k]:.17g},{self.values[j, k]:.17g}\n")


@dataclass
class SolveStats:
    max_picard_iters: int = 0
    total_picard_iters: int = 0
    steps: int = 0


def _build_step_matrix(grid: Grid, diff: float, adv: np.ndarray,
                       reac: np.ndarray):
    """Banded matrix of the implicit step.  Returns a prefactored LU.

    Boundary rows impose a zero first difference in y.  The solution is
    asymptotically flat in y at both ends of the transformed domain, and
    unlike linear extrapolation this row keeps the matrix an M-matrix, so
    positivity and order comparisons survive discretization up to the
    boundary nodes.
    """
    n = grid.n_y
    dy = grid.dy
    dt = grid.dtau
    a_pos = np.maximum(adv, 0.0)
    a_neg = np.minimum(adv, 0.0)
    lower = -dt * (diff / dy ** 2 - a_neg / dy)
    diag = 1.0 + dt * (2.0 * diff / dy ** 2 + (a_pos - a_neg) / dy - reac)
    upper = -dt * (diff / dy ** 2 + a_pos / dy)

    rows = [0, 0]
    cols = [0, 1]
    vals = [1.0, -1.0]
    idx = np.arange(1, n - 1)
    rows += list(idx) * 3
    cols += list(idx - 1) + list(idx) + list(idx + 1)
    vals += list(lower[idx]) + list(diag[idx]) + list(upper[idx])
    rows += [n - 1, n - 1]
    cols += [n - 2, n - 1]
    vals += [-1.0, 1.0]
    mat = csc_matrix((vals, (rows, cols)), shape=(n, n))
    return splu(mat)


def solve_terminal_value(grid: Grid, config: SolverConfig,
                         terminal: Callable[[np.ndarray], np.ndarray],
                         source: NonlinearSource, name: str = "",
                         stats: SolveStats | None = None) -> Surface:
    """March the terminal data from tau = 0 to tau = horizon.

    Raises :class:`PicardDivergenceError` when a step's fixed-point iteration
    hits the cap above tolerance and :class:`NonFiniteValueError` as soon as a
    NaN or infinity appears.
    """
    ys = grid.ys
    u0 = np.asarray(terminal(ys), dtype=float)
    if u0.shape == ():
        u0 = np.full(grid.n_y, float(u0))
    if u0.shape != (grid.n_y,):
        raise ConfigError(f"terminal data shape {u0.shape} != ({grid.n_y},)")
    if not np.all(np.isfinite(u0)):
        raise NonFiniteValueError("terminal data is not finite")

    values = np.empty((grid.n_y, grid.n_tau + 1))
    values[:, 0] = u0
    dt = grid.dtau
    inv_2dy = 1.0 / (2.0 * grid.dy)

    lu = None
    u_prev = u0.copy()
    for k in range(1, grid.n_tau + 1):
        tau = grid.taus[k]
        if lu is None or not source.time_invariant:
            lu = _build_step_matrix(grid, float(source.diffusion(tau)),
                                    np.asarray(source.advection(ys, tau)),
                                    np.asarray(source.reaction(ys, tau)))
        rhs_base = u_prev.copy()
        rhs_base[0] = 0.0
        rhs_base[-1] = 0.0

        v = u_prev
        prev_iterate = None
        iters = 0
        for _ in range(config.picard_max_iters):
            iters += 1
            if source.extra is not None:
                p = np.empty_like(v)
                p[1:-1] = (v[2:] - v[:-2]) * inv_2dy
                p[0] = (v[1] - v[0]) / grid.dy
                p[-1] = (v[-1] - v[-2]) / grid.dy
                s = source.extra(k, tau, v, p)
                rhs = rhs_base.copy()
                rhs[1:-1] += dt * np.asarray(s)[1:-1]
            else:
                rhs = rhs_base
            v = lu.solve(rhs)
            if not np.all(np.isfinite(v)):
                raise NonFiniteValueError(
                    f"non-finite value at step {k} of solve {name!r}")
            if source.linear or source.extra is None:
                break
            if prev_iterate is not None:
                if float(np.max(np.abs(v - prev_iterate))) <= config.picard_tol:
                    break
            prev_iterate = v
        else:
            raise PicardDivergenceError(
                f"picard divergence at step {k} of solve {name!r}: "
                f"no convergence within {config.picard_max_iters} iterations")
        if iters > PICARD_WARN_ITERS:
            logger.warning("solve %r step %d needed %d picard iterations",
                           name, k, iters)
        if stats is not None:
            stats.max_picard_iters = max(stats.max_picard_iters, iters)
            stats.total_picard_iters += iters
            stats.steps += 1
        u_prev = v
        values[:, k] = v

    return Surface(grid, values, name)


def lambda_derivative(surface: Surface) -> Surface:
    """d/d lambda of a surface, via e^{-y} times the y-gradient.

    Centered differences in the interior, one-sided at the boundaries.
    """
    g = surface.grid
    grad_y = np.gradient(surface.values, g.dy, axis=0, edge_order=1)
    vals = grad_y * np.exp(-g.ys)[:, None]
    return Surface(g, vals, f"{surface.name}_dlambda" if surface.name else "dlambda")


def refine_and_estimate_order(solve: Callable[[Grid], Surface],
                              grids: Sequence[Grid], lam: float, t: float) -> float:
    """Richardson order estimate from solutions on three nested grids.

    ``grids`` must be nested by a factor of 2 in both spacings, coarsest
    first.  Returns log2 of the ratio of successive differences at the probe
    point; +inf when the finer pair already agrees to roundoff.
    """
    if len(grids) != 3:
        raise ConfigError("exactly three nested grids are required")
    for g0, g1 in zip(grids, grids[1:]):
        if (g1.n_y - 1) != 2 * (g0.n_y - 1) or g1.n_tau != 2 * g0.n_tau:
            raise ConfigError("grids must refine by a factor of 2 in both axes")
    u = [solve(g).value_at(lam, t) for g in grids]
    d1 = abs(u[0] - u[1])
    d2 = abs(u[1] - u[2])
    if d2 == 0.0:
        return math.inf
    return math.log2(d1 / d2)
