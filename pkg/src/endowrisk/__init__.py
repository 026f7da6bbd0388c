"""Risk-adjusted pricing of pure endowments under stochastic hazard rates.

The price of a contract paying 1 at the horizon if the insured is then alive
factors into a closed-form bond price times a survival factor solving a
nonlinear terminal-value problem; the package solves that problem, the
n-contract recursion and its large-portfolio limit, decomposes the risk
charge into finite-portfolio and stochastic-mortality parts, and verifies
the qualitative theory (bounds, monotonicity, subadditivity, convergence
rate) numerically, with an independent Monte Carlo oracle.
"""

from .bonds import (BondPrice, ShortRateModel, bond_pde_residual,
                    bond_partials, bond_price)
from .errors import (ConfigError, EndowriskError, GridRangeError,
                     NonFiniteValueError, NumericalError,
                     PicardDivergenceError, SolverQualityError)
from .estimator import EndowmentPricer
from .hazard import HazardKind, HazardModel, ValidationReport, validate
from .montecarlo import (McConfig, McEstimate, Measure, SurvivorPremium,
                         mc_beta, mc_phi_physical, mc_survivor_premium,
                         simulate_hazard_path)
from .pde import (Grid, NonlinearSource, SolverConfig, Surface,
                  lambda_derivative, refine_and_estimate_order,
                  solve_terminal_value)
from .pricing import (PortfolioLadder, PricingProblem, RateBoundConstants,
                      RiskDecomposition, beta, deterministic_survival,
                      gamma_ladder, hedge_ratio, phi_alpha0,
                      phi_deterministic_closed_form, phi_portfolio,
                      phi_single, price, rate_bound_constants,
                      rate_bound_integrands, risk_decomposition,
                      sharpe_identity_check)

__version__ = "0.1.0"

__all__ = [
    "BondPrice", "ConfigError", "EndowmentPricer", "EndowriskError", "Grid",
    "GridRangeError", "HazardKind", "HazardModel", "McConfig", "McEstimate",
    "Measure", "NonFiniteValueError", "NonlinearSource", "NumericalError",
    "PicardDivergenceError", "PortfolioLadder", "PricingProblem",
    "RateBoundConstants", "RiskDecomposition", "ShortRateModel",
    "SolverConfig", "SolverQualityError", "Surface", "SurvivorPremium",
    "ValidationReport", "beta", "bond_partials", "bond_pde_residual",
    "bond_price", "deterministic_survival", "gamma_ladder", "hedge_ratio",
    "lambda_derivative", "mc_beta", "mc_phi_physical", "mc_survivor_premium",
    "phi_alpha0", "phi_deterministic_closed_form", "phi_portfolio",
    "phi_single", "price", "rate_bound_constants", "rate_bound_integrands",
    "refine_and_estimate_order", "risk_decomposition",
    "sharpe_identity_check", "simulate_hazard_path", "solve_terminal_value",
    "validate",
]
