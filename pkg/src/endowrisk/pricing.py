"""Risk-adjusted pure-endowment pricing quantities.

The price of a pure endowment paying 1 at the horizon factors as
P = F(r, t) * phi(lambda, t): a closed-form bond price times a survival
factor that solves a nonlinear terminal-value problem.  This module produces
every derived object:

* ``phi_single`` / ``phi_portfolio`` -- the survival factor for one contract
  and the recursion for n identical conditionally independent contracts,
* ``beta`` -- the large-portfolio per-risk limit (linear, tilted drift),
* ``gamma_ladder`` -- the linear upper-envelope recursion squeezing the
  per-risk factor against ``beta``,
* ``price`` / ``hedge_ratio`` / ``risk_decomposition`` -- point queries,
* ``sharpe_identity_check`` -- a residual test that the computed price earns
  exactly the target instantaneous Sharpe ratio,
* ``rate_bound_constants`` -- the explicit constants of the convergence-rate
  bound (1/n + 2 J / sqrt(n)).

All equations are solved in the transformed (y, tau) coordinates of
:mod:`endowrisk.pde` on a single shared grid so that recursion sources line
up without interpolation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.integrate import quad

from .bonds import ShortRateModel, bond_price
from .errors import ConfigError, SolverQualityError
from .hazard import HazardKind, HazardModel, ValidationReport, validate
from .pde import (DEFAULT_N_TAU, DEFAULT_N_Y, Grid, NonlinearSource,
                  SolveStats, SolverConfig, Surface, solve_terminal_value)
from .validation import check_int, check_scalar

#: Nodewise slack above which a non-monotone ladder is a solver failure.
LADDER_MONOTONE_TOL = 1e-6

#: Ladders larger than this must name the levels to retain.
MAX_RETAINED_LEVELS = 32


@dataclass(frozen=True)
class PricingProblem:
    """A fully specified pricing run: models, Sharpe ratio, horizon, grids."""

    hazard: HazardModel
    bond: ShortRateModel
    alpha: float
    horizon: float
    grid: Grid
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        check_scalar(self.alpha, "alpha", minimum=0.0)
        sqrt_floor = math.sqrt(self.hazard.lambda_floor)
        if self.alpha > sqrt_floor:
            raise ConfigError(
                f"alpha={self.alpha:g} exceeds sqrt(lambda_floor)={sqrt_floor:g}")
        check_scalar(self.horizon, "horizon", minimum=0.0, strict_min=True)
        if not math.isclose(self.grid.horizon, self.horizon):
            raise ConfigError(
                f"grid horizon {self.grid.horizon} != problem horizon {self.horizon}")
        if not math.isclose(self.grid.lambda_floor, self.hazard.lambda_floor):
            raise ConfigError("grid and hazard disagree on the floor")

    @classmethod
    def build(cls, hazard: HazardModel, bond: ShortRateModel, alpha: float,
              horizon: float, eval_lambdas: Sequence[float],
              n_y: int = DEFAULT_N_Y, n_tau: int = DEFAULT_N_TAU,
              solver: SolverConfig | None = None) -> "PricingProblem":
        grid = Grid.for_floor(hazard.lambda_floor, eval_lambdas, horizon,
                              n_y=n_y, n_tau=n_tau)
        return cls(hazard, bond, alpha, horizon, grid, solver or SolverConfig())

    def refined(self, factor: int = 2) -> "PricingProblem":
        return replace(self, grid=self.grid.refined(factor))

    def validation_report(self) -> ValidationReport:
        return validate(self.hazard, self.alpha, self.grid)

    def validate_or_raise(self) -> ValidationReport:
        report = self.validation_report()
        if not report.passed:
            failure = report.first_failure
            raise ConfigError(
                f"hazard validation failed: {failure.name}: {failure.detail}")
        return report


# ----------------------------------------------------------------------
# source terms in transformed coordinates


def _survival_reaction(grid: Grid) -> np.ndarray:
    return -grid.lambdas


def _plain_advection(problem: PricingProblem):
    hz, horizon = problem.hazard, problem.horizon

    def advection(ys, tau):
        return hz.drift_y(ys, horizon - tau)

    return advection


def _tilted_advection(problem: PricingProblem, alpha: float):
    hz, horizon = problem.hazard, problem.horizon

    def advection(ys, tau):
        t = horizon - tau
        return hz.drift_y(ys, t) - alpha * hz.vol_level(t)

    return advection


def _diffusion(problem: PricingProblem):
    hz, horizon = problem.hazard, problem.horizon

    def diffusion(tau):
        b = hz.vol_level(horizon - tau)
        return 0.5 * b * b

    return diffusion


def _phi_source(problem: PricingProblem, n: int,
                prev: Surface | None) -> NonlinearSource:
    grid = problem.grid
    lam = grid.lambdas
    alpha = problem.alpha
    hz, horizon = problem.hazard, problem.horizon
    n_lam = n * lam
    prev_vals = prev.values if prev is not None else None

    if alpha == 0.0:
        if prev_vals is None:
            extra = None
        else:
            def extra(k, tau, u, p):
                return n_lam * prev_vals[:, k]
        linear = True
    else:
        def extra(k, tau, u, p):
            b = hz.vol_level(horizon - tau)
            if prev_vals is None:
                q = u
                base = 0.0
            else:
                w = prev_vals[:, k]
                q = u - w
                base = n_lam * w
            operand = b * b * p * p + n_lam * q * q
            return base + alpha * np.sqrt(np.maximum(operand, 0.0))
        linear = False

    return NonlinearSource(
        diffusion=_diffusion(problem),
        advection=_plain_advection(problem),
        reaction=lambda ys, tau: -n_lam,
        extra=extra,
        linear=linear,
    )


def _linear_survival_source(problem: PricingProblem, alpha: float) -> NonlinearSource:
    return NonlinearSource(
        diffusion=_diffusion(problem),
        advection=_tilted_advection(problem, alpha),
        reaction=lambda ys, tau: _survival_reaction(problem.grid),
        extra=None,
        linear=True,
    )


def _effective_rate(problem: PricingProblem, n: int) -> np.ndarray:
    """n lambda - alpha sqrt(n lambda), positive on the grid."""
    n_lam = n * problem.grid.lambdas
    return n_lam - problem.alpha * np.sqrt(n_lam)


def _gamma_source(problem: PricingProblem, n: int,
                  prev: Surface | None) -> NonlinearSource:
    rate = _effective_rate(problem, n)
    prev_vals = prev.values if prev is not None else None

    extra = None
    if prev_vals is not None:
        def extra(k, tau, u, p):
            return rate * prev_vals[:, k]

    return NonlinearSource(
        diffusion=_diffusion(problem),
        advection=_tilted_advection(problem, problem.alpha),
        reaction=lambda ys, tau: -rate,
        extra=extra,
        linear=True,
    )


def _rate_bound_integrand_source(problem: PricingProblem, n: int,
                                 forcing: np.ndarray) -> NonlinearSource:
    """Linear problem with the tilted drift, discount n lambda - alpha
    sqrt(n lambda) and a constant forcing; zero terminal data."""
    rate = _effective_rate(problem, n)
    return NonlinearSource(
        diffusion=_diffusion(problem),
        advection=_tilted_advection(problem, problem.alpha),
        reaction=lambda ys, tau: -rate,
        extra=lambda k, tau, u, p: forcing,
        linear=True,
    )


# ----------------------------------------------------------------------
# solves


def _solve_phi_level(problem: PricingProblem, n: int, prev: Surface | None,
                     stats: SolveStats | None = None) -> Surface:
    src = _phi_source(problem, n, prev)
    return solve_terminal_value(
        problem.grid, problem.solver,
        lambda ys: np.full(ys.shape, float(n)), src,
        name=f"phi_{n}", stats=stats)


def phi_single(problem: PricingProblem,
               stats: SolveStats | None = None) -> Surface:
    """Survival factor for a single contract (terminal value 1)."""
    problem.validate_or_raise()
    return _solve_phi_level(problem, 1, None, stats)


@dataclass(frozen=True)
class PortfolioLadder:
    """The indexed family of portfolio surfaces, with per-risk access.

    ``surfaces`` holds the retained levels only; a streamed ladder keeps the
    levels named in ``keep`` while the recursion itself always walks through
    every level.
    """

    n_max: int
    surfaces: Mapping[int, Surface]
    kind: str = "phi"

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(sorted(self.surfaces))

    def phi(self, n: int) -> Surface:
        try:
            return self.surfaces[n]
        except KeyError:
            raise ConfigError(
                f"level {n} was not retained (kept: {self.levels})") from None

    def zeta(self, n: int) -> Surface:
        """Per-risk surface phi^(n) / n."""
        return self.phi(n).scaled(1.0 / n, name=f"zeta_{n}")

    def zeta_at(self, n: int, lam: float, t: float) -> float:
        return self.phi(n).value_at(lam, t) / n


def _resolve_keep(n_max: int, keep) -> set[int]:
    if keep is None:
        if n_max > MAX_RETAINED_LEVELS:
            raise ConfigError(
                f"ladders beyond n_max={MAX_RETAINED_LEVELS} must pass "
                "keep=... to bound memory")
        return set(range(1, n_max + 1))
    keep_set = {check_int(n, "keep entry", minimum=1) for n in keep}
    bad = [n for n in keep_set if n > n_max]
    if bad:
        raise ConfigError(f"keep levels {bad} exceed n_max={n_max}")
    return keep_set


def phi_portfolio(problem: PricingProblem, n_max: int, keep=None,
                  stats: SolveStats | None = None,
                  on_level: Callable[[int, Surface], None] | None = None
                  ) -> PortfolioLadder:
    """Solve the portfolio recursion for n = 1..n_max on the shared grid.

    ``keep`` names the levels whose surfaces are retained (all by default,
    memory permitting); ``on_level`` sees every level as it is produced, so
    point traces of deep ladders need not retain surfaces.  Raises
    :class:`SolverQualityError` if a level drops below its predecessor by
    more than the monotonicity slack, which the monotone scheme should never
    produce.
    """
    check_int(n_max, "n_max", minimum=1)
    keep_set = _resolve_keep(n_max, keep)
    problem.validate_or_raise()
    retained: dict[int, Surface] = {}
    prev: Surface | None = None
    for n in range(1, n_max + 1):
        surf = _solve_phi_level(problem, n, prev, stats)
        if prev is not None:
            drop = float(np.max(prev.values - surf.values))
            if drop > LADDER_MONOTONE_TOL:
                raise SolverQualityError(
                    f"phi_{n} falls below phi_{n - 1} by {drop:.3e} "
                    f"(> {LADDER_MONOTONE_TOL:g}); solver quality violated")
        if n in keep_set:
            retained[n] = surf
        if on_level is not None:
            on_level(n, surf)
        prev = surf
    return PortfolioLadder(n_max, retained, "phi")


def beta(problem: PricingProblem, stats: SolveStats | None = None) -> Surface:
    """Large-portfolio per-risk limit: linear solve with the tilted drift."""
    problem.validate_or_raise()
    return solve_terminal_value(
        problem.grid, problem.solver, lambda ys: np.ones(ys.shape),
        _linear_survival_source(problem, problem.alpha),
        name="beta", stats=stats)


def phi_alpha0(problem: PricingProblem, stats: SolveStats | None = None) -> Surface:
    """Physical survival probability (the zero-Sharpe, risk-neutral factor)."""
    problem.validate_or_raise()
    return solve_terminal_value(
        problem.grid, problem.solver, lambda ys: np.ones(ys.shape),
        _linear_survival_source(problem, 0.0),
        name="phi_alpha0", stats=stats)


def gamma_ladder(problem: PricingProblem, n_max: int, keep=None,
                 stats: SolveStats | None = None,
                 on_level: Callable[[int, Surface], None] | None = None
                 ) -> PortfolioLadder:
    """Linear upper-envelope recursion with terminal value n per level."""
    check_int(n_max, "n_max", minimum=1)
    keep_set = _resolve_keep(n_max, keep)
    problem.validate_or_raise()
    retained: dict[int, Surface] = {}
    prev: Surface | None = None
    for n in range(1, n_max + 1):
        surf = solve_terminal_value(
            problem.grid, problem.solver,
            lambda ys, n=n: np.full(ys.shape, float(n)),
            _gamma_source(problem, n, prev),
            name=f"gamma_{n}", stats=stats)
        if n in keep_set:
            retained[n] = surf
        if on_level is not None:
            on_level(n, surf)
        prev = surf
    return PortfolioLadder(n_max, retained, "gamma")


def rate_bound_integrands(problem: PricingProblem, n: int,
                          stats: SolveStats | None = None) -> tuple[Surface, Surface]:
    """The two expected-integral surfaces whose bounds (J and 1) drive the
    convergence-rate estimate; both have zero terminal data."""
    check_int(n, "n", minimum=2)
    lam = problem.grid.lambdas
    f_surf = solve_terminal_value(
        problem.grid, problem.solver, lambda ys: np.zeros(ys.shape),
        _rate_bound_integrand_source(problem, n,
                                     problem.alpha * n * np.sqrt(lam)),
        name=f"rate_f_{n}", stats=stats)
    h_surf = solve_terminal_value(
        problem.grid, problem.solver, lambda ys: np.zeros(ys.shape),
        _rate_bound_integrand_source(problem, n, _effective_rate(problem, n)),
        name=f"rate_h_{n}", stats=stats)
    return f_surf, h_surf


# ----------------------------------------------------------------------
# point queries


def price(problem: PricingProblem, ladder: PortfolioLadder,
          r: float, lam: float, t: float, n: int = 1) -> float:
    """P^(n)(r, lambda, t) = F(r, t) * phi^(n)(lambda, t) by interpolation."""
    f = bond_price(problem.bond, r, t, problem.horizon).value
    return f * ladder.phi(n).value_at(lam, t)


def hedge_ratio(problem: PricingProblem, phi: Surface,
                r: float, lam: float, t: float) -> float:
    """Bond holding that minimizes the local variance; equals the survival
    factor itself and is independent of r under the product form."""
    return phi.value_at(lam, t)


@dataclass(frozen=True)
class RiskDecomposition:
    """Per-risk price split into its two risk charges.

    ``finite_portfolio_charge`` prices the risk of insuring finitely many
    lives; ``stochastic_mortality_charge`` prices the non-diversifiable
    randomness of the hazard itself.  The two sum to
    ``per_risk_price - risk_neutral`` by construction.
    """

    per_risk_price: float
    risk_neutral: float
    finite_portfolio_charge: float
    stochastic_mortality_charge: float

    @property
    def total_charge(self) -> float:
        return self.per_risk_price - self.risk_neutral


def risk_decomposition(problem: PricingProblem, ladder: PortfolioLadder,
                       beta_surface: Surface, alpha0_surface: Surface,
                       n: int, r: float, lam: float, t: float) -> RiskDecomposition:
    f = bond_price(problem.bond, r, t, problem.horizon).value
    zeta_val = ladder.phi(n).value_at(lam, t) / n
    beta_val = beta_surface.value_at(lam, t)
    alpha0_val = alpha0_surface.value_at(lam, t)
    return RiskDecomposition(
        per_risk_price=f * zeta_val,
        risk_neutral=f * alpha0_val,
        finite_portfolio_charge=f * (zeta_val - beta_val),
        stochastic_mortality_charge=f * (beta_val - alpha0_val),
    )


# ----------------------------------------------------------------------
# Sharpe-ratio identity


@dataclass(frozen=True)
class IdentityCheckResult:
    max_residual: float
    n_points: int


def default_identity_sample(grid: Grid, n_y_points: int = 10,
                            n_t_points: int = 10) -> list[tuple[int, int]]:
    """Interior (y-index, tau-index) lattice used for the identity residual."""
    j_lo = max(1, int(0.15 * (grid.n_y - 1)))
    j_hi = min(grid.n_y - 2, int(0.85 * (grid.n_y - 1)))
    k_lo = max(1, int(0.05 * grid.n_tau))
    k_hi = min(grid.n_tau - 1, int(0.95 * grid.n_tau))
    js = np.unique(np.linspace(j_lo, j_hi, n_y_points).astype(int))
    ks = np.unique(np.linspace(k_lo, k_hi, n_t_points).astype(int))
    return [(int(j), int(k)) for j in js for k in ks]


def sharpe_identity_check(problem: PricingProblem, phi: Surface,
                          sample: Iterable[tuple[int, int]] | None = None,
                          r: float | None = None) -> IdentityCheckResult:
    """Reconstruct both sides of the pricing identity from the surface.

    The drift of the hedged portfolio must equal the short rate times the
    portfolio plus alpha times its local standard deviation.  All hazard
    derivatives come from finite differences of the stored surface (in the
    transformed coordinates, where the degenerate factors cancel exactly);
    bond partials are analytic.  Returns the maximum absolute residual.
    """
    from .bonds import bond_partials

    g = problem.grid
    u = phi.values
    if sample is None:
        sample = default_identity_sample(g)
    if r is None:
        r = problem.bond.reference_rate
    alpha = problem.alpha
    hz = problem.hazard
    horizon = problem.horizon
    dy, dtau = g.dy, g.dtau

    worst = 0.0
    count = 0
    for j, k in sample:
        if not (1 <= j <= g.n_y - 2 and 1 <= k <= g.n_tau - 1):
            raise ConfigError(f"sample node ({j}, {k}) is not interior")
        y = g.ys[j]
        lam = g.lambdas[j]
        tau = g.taus[k]
        t = horizon - tau
        u_y = (u[j + 1, k] - u[j - 1, k]) / (2.0 * dy)
        u_yy = (u[j + 1, k] - 2.0 * u[j, k] + u[j - 1, k]) / dy ** 2
        phi_t = -(u[j, k + 1] - u[j, k - 1]) / (2.0 * dtau)
        phi_v = u[j, k]

        f, f_r, f_rr, f_t = bond_partials(problem.bond, r, t, horizon)
        b = hz.vol_level(t)
        rel_drift = hz.drift_y(y, t) + 0.5 * b * b  # a / (lambda - floor)

        p_val = f * phi_v
        p_t = f_t * phi_v + f * phi_t
        p_r = f_r * phi_v
        p_rr = f_rr * phi_v
        advection_term = f * rel_drift * u_y           # a * P_lambda
        diffusion_term = f * 0.5 * b * b * (u_yy - u_y)
        generator = (p_t + problem.bond.drift_q(r, t) * p_r
                     + 0.5 * problem.bond.sigma(r, t) ** 2 * p_rr
                     + advection_term + diffusion_term - lam * p_val)
        bond_leg = p_r * f / f_r
        portfolio = -p_val + bond_leg
        local_var = b * b * u_y ** 2 * f * f + lam * p_val ** 2
        lhs = -generator + r * bond_leg
        rhs = r * portfolio + alpha * math.sqrt(max(local_var, 0.0))
        worst = max(worst, abs(lhs - rhs))
        count += 1
    return IdentityCheckResult(worst, count)


# ----------------------------------------------------------------------
# deterministic closed forms


def deterministic_survival(hazard: HazardModel, alpha: float, lam: float,
                           t: float, horizon: float) -> float:
    """exp(-int_t^T (lambda(s) - alpha sqrt(lambda(s))) ds) along the
    deterministic path with lambda(t) = lam.

    The hazard integral is elementary.  The sqrt integral is elementary when
    the floor is zero; otherwise it falls back to adaptive quadrature at
    tolerance 1e-10.
    """
    if not hazard.is_deterministic:
        raise ConfigError("closed form requires a deterministic hazard (b == 0)")
    check_scalar(alpha, "alpha", minimum=0.0)
    if t > horizon:
        raise ConfigError(f"t={t} exceeds the horizon {horizon}")
    floor = hazard.lambda_floor
    if lam <= floor:
        raise ConfigError(f"lambda={lam} must exceed the floor {floor}")
    span = horizon - t
    gap = lam - floor
    growth = (hazard.params.growth
              if hazard.kind is HazardKind.DETERMINISTIC_EXPONENTIAL else 0.0)

    if growth == 0.0:
        integral_lam = lam * span
    else:
        integral_lam = floor * span + gap * (math.exp(growth * span) - 1.0) / growth

    if alpha == 0.0:
        return math.exp(-integral_lam)

    if growth == 0.0:
        integral_sqrt = math.sqrt(lam) * span
    elif floor == 0.0:
        integral_sqrt = (2.0 * math.sqrt(lam)
                         * (math.exp(0.5 * growth * span) - 1.0) / growth)
    else:
        integral_sqrt, _ = quad(
            lambda s: math.sqrt(floor + gap * math.exp(growth * (s - t))),
            t, horizon, epsabs=1e-10, epsrel=1e-10, limit=200)
    return math.exp(-integral_lam + alpha * integral_sqrt)


def phi_deterministic_closed_form(hazard: HazardModel, alpha: float,
                                  t: float, horizon: float) -> float:
    """Closed-form survival factor along the model's own path from time 0."""
    if not hazard.is_deterministic:
        raise ConfigError("closed form requires a deterministic hazard (b == 0)")
    floor = hazard.lambda_floor
    lam0 = hazard.params.lambda0
    if hazard.kind is HazardKind.DETERMINISTIC_EXPONENTIAL:
        lam_t = floor + (lam0 - floor) * math.exp(hazard.params.growth * t)
    else:
        lam_t = lam0
    return deterministic_survival(hazard, alpha, lam_t, t, horizon)


# ----------------------------------------------------------------------
# convergence-rate constants


@dataclass(frozen=True)
class RateBoundConstants:
    j: float
    k_n: float
    l_n: float
    bound: float


def rate_bound_constants(lambda_floor: float, alpha: float, n: int) -> RateBoundConstants:
    """Explicit constants of the per-risk convergence-rate bound.

    J = alpha sqrt(2) / (sqrt(2 floor) - alpha) requires
    alpha < sqrt(2 floor); K_n follows the recursion
    K_1 = 1, K_n = J / n^{3/2} + ((n - 1)/n) K_{n-1}; L_n = n K_n; and the
    closed bound is 1/n + 2 J / sqrt(n).
    """
    check_scalar(lambda_floor, "lambda_floor", minimum=0.0)
    check_scalar(alpha, "alpha", minimum=0.0)
    check_int(n, "n", minimum=1)
    if alpha == 0.0:
        j = 0.0
    else:
        threshold = math.sqrt(2.0 * lambda_floor)
        if alpha >= threshold:
            raise ConfigError(
                f"alpha={alpha:g} must be < sqrt(2 lambda_floor)={threshold:g}")
        j = alpha * math.sqrt(2.0) / (threshold - alpha)
    k_n = 1.0
    for i in range(2, n + 1):
        k_n = j / i ** 1.5 + (i - 1) / i * k_n
    bound = 1.0 / n + 2.0 * j / math.sqrt(n)
    return RateBoundConstants(j, k_n, n * k_n, bound)
