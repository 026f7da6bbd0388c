import math

import pytest

from endowrisk import (HazardModel, PricingProblem, ShortRateModel,
                       SolverConfig)


@pytest.fixture(scope="session")
def log_ou_hazard():
    return HazardModel.shifted_log_ou(theta=math.log(0.02), kappa_y=0.5,
                                      b0=0.2, lambda_floor=0.04)


@pytest.fixture(scope="session")
def constant_bond():
    return ShortRateModel.constant(0.03)


@pytest.fixture(scope="session")
def small_problem(log_ou_hazard, constant_bond):
    """Default stochastic scenario on a coarse grid; fast for unit tests."""
    return PricingProblem.build(log_ou_hazard, constant_bond, alpha=0.1,
                                horizon=10.0, eval_lambdas=[0.06],
                                n_y=161, n_tau=400)


@pytest.fixture(scope="session")
def small_const_problem(constant_bond):
    hazard = HazardModel.constant(0.05, 0.04)
    return PricingProblem.build(hazard, constant_bond, alpha=0.1,
                                horizon=10.0, eval_lambdas=[0.05],
                                n_y=201, n_tau=1000)


@pytest.fixture(scope="session")
def solver():
    return SolverConfig()
