"""Estimator-style front end: fit solves the surfaces, predict prices points.

``EndowmentPricer`` follows the scikit-learn conventions (constructor stores
parameters verbatim, ``fit`` computes trailing-underscore attributes,
``get_params``/``set_params`` work for grid search and cloning), so pricing
runs compose with the wider ecosystem: parameter sweeps, pipelines and
cross-scenario batch jobs all treat it as an ordinary estimator.

``fit`` takes no training data; it solves the survival-factor ladder, the
large-portfolio limit and the risk-neutral factor on the configured grid.
``predict`` maps query rows (short rate, hazard rate, time) to contract
prices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bonds import ShortRateModel, bond_price
from .errors import ConfigError
from .hazard import HazardModel
from .pde import (DEFAULT_N_TAU, DEFAULT_N_Y, DEFAULT_Y_MARGIN, Grid,
                  SolverConfig, Surface)
from .pricing import (IdentityCheckResult, PortfolioLadder, PricingProblem,
                      RiskDecomposition, beta, gamma_ladder, phi_alpha0,
                      phi_portfolio, risk_decomposition, sharpe_identity_check)
from .validation import as_query_array, check_int, check_scalar


class EndowmentPricer(BaseEstimator):
    """Prices pure endowments on n conditionally independent lives.

    Parameters
    ----------
    hazard : HazardModel
        Stochastic or deterministic hazard-rate model.
    bond : ShortRateModel
        Closed-form short-rate model supplying the discount bond.
    alpha : float
        Instantaneous Sharpe ratio demanded per unit of local standard
        deviation; must lie in [0, sqrt(hazard.lambda_floor)].
    horizon : float
        Contract maturity in years.
    n_max : int
        Deepest portfolio level solved by ``fit``.
    eval_lambdas : sequence of float, optional
        Hazard levels the grid must cover well; defaults to the model's own
        reference level when available.
    n_y, n_tau : int
        Grid resolution in log-hazard space and in time.
    y_margin : float
        Minimum log-space margin kept around the evaluation hazards.
    solver : SolverConfig, optional
    keep : iterable of int, optional
        Ladder levels to retain; defaults to all (memory permitting).
    with_gamma : bool
        Also solve the linear upper-envelope ladder during ``fit``.

    Attributes
    ----------
    problem_ : PricingProblem
    ladder_ : PortfolioLadder
    beta_ : Surface
    phi_alpha0_ : Surface
    gamma_ : PortfolioLadder, only when ``with_gamma``
    validation_report_ : ValidationReport
    """

    def __init__(self, hazard: HazardModel | None = None,
                 bond: ShortRateModel | None = None, alpha: float = 0.0,
                 horizon: float = 10.0, n_max: int = 1,
                 eval_lambdas=None, n_y: int = DEFAULT_N_Y,
                 n_tau: int = DEFAULT_N_TAU, y_margin: float = DEFAULT_Y_MARGIN,
                 solver: SolverConfig | None = None, keep=None,
                 with_gamma: bool = False):
        self.hazard = hazard
        self.bond = bond
        self.alpha = alpha
        self.horizon = horizon
        self.n_max = n_max
        self.eval_lambdas = eval_lambdas
        self.n_y = n_y
        self.n_tau = n_tau
        self.y_margin = y_margin
        self.solver = solver
        self.keep = keep
        self.with_gamma = with_gamma

    # ------------------------------------------------------------------

    def _default_eval_lambdas(self) -> list[float]:
        if self.eval_lambdas is not None:
            lams = [check_scalar(v, "eval_lambdas entry", minimum=0.0,
                                 strict_min=True) for v in self.eval_lambdas]
            if not lams:
                raise ConfigError("eval_lambdas must not be empty")
            return lams
        params = self.hazard.params
        lam0 = getattr(params, "lambda0", None)
        if lam0 is not None:
            return [float(lam0)]
        # log-OU: center the window on the long-run hazard level
        return [self.hazard.lambda_floor + float(np.exp(params.theta))]

    def fit(self, X=None, y=None) -> "EndowmentPricer":
        """Solve every configured surface; X and y are ignored."""
        if self.hazard is None or self.bond is None:
            raise ConfigError("hazard and bond models are required to fit")
        if not isinstance(self.hazard, HazardModel):
            raise ConfigError(f"hazard must be a HazardModel, got {self.hazard!r}")
        if not isinstance(self.bond, ShortRateModel):
            raise ConfigError(f"bond must be a ShortRateModel, got {self.bond!r}")
        check_int(self.n_max, "n_max", minimum=1)
        grid = Grid.for_floor(self.hazard.lambda_floor,
                              self._default_eval_lambdas(), self.horizon,
                              n_y=self.n_y, n_tau=self.n_tau,
                              margin=self.y_margin)
        problem = PricingProblem(self.hazard, self.bond, self.alpha,
                                 self.horizon, grid,
                                 self.solver or SolverConfig())
        self.validation_report_ = problem.validate_or_raise()
        self.problem_ = problem
        self.ladder_ = phi_portfolio(problem, self.n_max, keep=self.keep)
        self.beta_ = beta(problem)
        self.phi_alpha0_ = phi_alpha0(problem)
        if self.with_gamma:
            self.gamma_ = gamma_ladder(problem, self.n_max, keep=self.keep)
        return self

    def _check_fitted(self):
        if not hasattr(self, "ladder_"):
            raise ConfigError("this EndowmentPricer instance is not fitted yet; "
                              "call fit() first")

    # ------------------------------------------------------------------
    # query API

    def predict(self, X, n: int | None = None) -> np.ndarray:
        """Prices P^(n) at query rows (short rate, hazard rate, time)."""
        self._check_fitted()
        queries = as_query_array(X)
        level = self.n_max if n is None else check_int(n, "n", minimum=1)
        surf = self.ladder_.phi(level)
        out = np.empty(len(queries))
        for i, (r, lam, t) in enumerate(queries):
            f = bond_price(self.bond, r, t, self.horizon).value
            out[i] = f * surf.value_at(lam, t)
        return out

    def price(self, r: float, lam: float, t: float, n: int | None = None) -> float:
        return float(self.predict([[r, lam, t]], n=n)[0])

    def hedge_ratio(self, r: float, lam: float, t: float) -> float:
        """Bonds held per contract; equals the single-contract survival
        factor and is independent of r under the product price form."""
        self._check_fitted()
        return self.ladder_.phi(1).value_at(lam, t)

    def survival_factor(self, lam: float, t: float, n: int = 1) -> float:
        self._check_fitted()
        return self.ladder_.phi(n).value_at(lam, t)

    def per_risk_factor(self, n: int, lam: float, t: float) -> float:
        self._check_fitted()
        return self.ladder_.zeta_at(n, lam, t)

    def risk_decomposition(self, n: int, r: float, lam: float,
                           t: float) -> RiskDecomposition:
        self._check_fitted()
        return risk_decomposition(self.problem_, self.ladder_, self.beta_,
                                  self.phi_alpha0_, n, r, lam, t)

    def sharpe_identity_check(self, sample=None,
                              r: float | None = None) -> IdentityCheckResult:
        self._check_fitted()
        return sharpe_identity_check(self.problem_, self.ladder_.phi(1),
                                     sample=sample, r=r)
