import dataclasses
import math

import numpy as np
import pytest

from endowrisk import (ConfigError, HazardModel, McConfig, Measure,
                       PricingProblem, mc_beta, mc_phi_physical,
                       mc_survivor_premium, phi_alpha0, simulate_hazard_path)

SLOU = HazardModel.shifted_log_ou(theta=math.log(0.02), kappa_y=0.5, b0=0.2,
                                  lambda_floor=0.04)

SMALL = McConfig(n_paths=20_000, steps_per_year=50, seed=99)
TILTED_SMALL = dataclasses.replace(SMALL, measure=Measure.ALPHA_TILTED)


class TestPaths:
    def test_constant_hazard_path_is_constant(self):
        model = HazardModel.constant(0.05, 0.04)
        path = simulate_hazard_path(model, 0.05, Measure.PHYSICAL, 0.0, 10.0,
                                    SMALL, path_index=3)
        assert np.all(path == 0.05)

    def test_exponential_path_matches_closed_form(self):
        # constant y-drift makes the Euler step exact up to rounding
        model = HazardModel.deterministic_exponential(0.01, 0.08, 0.0)
        path = simulate_hazard_path(model, 0.01, Measure.PHYSICAL, 0.0, 10.0,
                                    SMALL, path_index=0)
        times = np.linspace(0.0, 10.0, len(path))
        exact = 0.01 * np.exp(0.08 * times)
        assert np.max(np.abs(path - exact)) < 1e-12

    def test_paths_stay_above_floor(self):
        for i in range(16):
            path = simulate_hazard_path(SLOU, 0.06, Measure.PHYSICAL, 0.0,
                                        10.0, SMALL, path_index=i)
            assert np.all(path > 0.04)

    def test_antithetic_pairing(self):
        cfg = SMALL
        base = simulate_hazard_path(SLOU, 0.06, Measure.PHYSICAL, 0.0, 10.0,
                                    cfg, path_index=0)
        mirror = simulate_hazard_path(SLOU, 0.06, Measure.PHYSICAL, 0.0, 10.0,
                                      cfg, path_index=1)
        ys_base = np.log(base - 0.04)
        ys_mirror = np.log(mirror - 0.04)
        # first step: opposite noise around the same drift
        drift = SLOU.drift_y(math.log(0.02), 0.0)
        dt = 10.0 / len(base[1:])
        mid = math.log(0.02) + drift * dt
        assert ys_base[1] - mid == pytest.approx(-(ys_mirror[1] - mid),
                                                 abs=1e-14)

    def test_tilted_ou_terminal_mean(self):
        cfg = dataclasses.replace(SMALL, antithetic=False,
                                  measure=Measure.ALPHA_TILTED)
        alpha = 0.1
        terminal_y = np.array([
            math.log(simulate_hazard_path(SLOU, 0.06, Measure.ALPHA_TILTED,
                                          0.0, 10.0, cfg, i, alpha=alpha)[-1]
                     - 0.04)
            for i in range(400)])
        theta_tilted = math.log(0.02) - alpha * 0.2 / 0.5
        mean_exact = theta_tilted + (math.log(0.02) - theta_tilted) * math.exp(-5.0)
        se = terminal_y.std(ddof=1) / math.sqrt(len(terminal_y))
        assert abs(terminal_y.mean() - mean_exact) <= 3 * se


class TestEstimators:
    def test_constant_hazard_exact(self):
        model = HazardModel.constant(0.05, 0.0)
        est = mc_phi_physical(model, 0.05, 0.0, 10.0, SMALL)
        assert est.mean == pytest.approx(math.exp(-0.5), abs=1e-12)
        assert est.se == 0.0

    def test_exponential_matches_quadrature(self):
        model = HazardModel.deterministic_exponential(0.01, 0.08, 0.0)
        est = mc_phi_physical(model, 0.01, 0.0, 10.0, SMALL)
        # deterministic path; only trapezoid bias remains
        assert est.mean == pytest.approx(0.857964448161763, abs=1e-6)

    def test_slou_matches_pde(self, constant_bond):
        prob = PricingProblem.build(SLOU, constant_bond, 0.1, 10.0, [0.06],
                                    n_y=401, n_tau=2000)
        pde = phi_alpha0(prob).value_at(0.06, 0.0)
        est = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, SMALL)
        assert abs(est.mean - pde) <= max(3 * est.se, 2e-3)

    def test_beta_requires_tilted_measure(self):
        with pytest.raises(ConfigError):
            mc_beta(SLOU, 0.1, 0.06, 0.0, 10.0, SMALL)
        with pytest.raises(ConfigError):
            mc_phi_physical(SLOU, 0.06, 0.0, 10.0, TILTED_SMALL)

    def test_beta_deterministic_equals_physical(self):
        model = HazardModel.constant(0.05, 0.04)
        tilted = mc_beta(model, 0.1, 0.05, 0.0, 10.0, TILTED_SMALL)
        plain = mc_phi_physical(model, 0.05, 0.0, 10.0, SMALL)
        assert tilted.mean == plain.mean

    def test_beta_above_physical_when_stochastic(self):
        tilted = mc_beta(SLOU, 0.1, 0.06, 0.0, 10.0, TILTED_SMALL)
        plain = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, SMALL)
        combined_se = math.hypot(tilted.se, plain.se)
        assert tilted.mean >= plain.mean - 3 * combined_se

    def test_reproducible_and_thread_invariant(self, monkeypatch):
        first = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, SMALL)
        second = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, SMALL)
        assert first.mean == second.mean and first.se == second.se
        monkeypatch.setenv("ENDOWRISK_THREADS", "2")
        threaded = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, SMALL)
        assert threaded.mean == first.mean and threaded.se == first.se

    def test_antithetic_halves_variance(self):
        cfg_on = dataclasses.replace(SMALL, n_paths=4000)
        cfg_off = dataclasses.replace(cfg_on, antithetic=False)
        se_on = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, cfg_on).se
        se_off = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, cfg_off).se
        assert se_on / se_off <= 0.8

    def test_step_halving_constant_hazard_exact(self):
        model = HazardModel.constant(0.05, 0.0)
        coarse = mc_phi_physical(model, 0.05, 0.0, 10.0, SMALL)
        fine = mc_phi_physical(
            model, 0.05, 0.0, 10.0,
            dataclasses.replace(SMALL, steps_per_year=100))
        assert coarse.mean == fine.mean

    def test_step_halving_weak_order_sanity(self):
        coarse = mc_phi_physical(SLOU, 0.06, 0.0, 10.0, SMALL)
        fine = mc_phi_physical(
            SLOU, 0.06, 0.0, 10.0,
            dataclasses.replace(SMALL, steps_per_year=100))
        combined_se = math.hypot(coarse.se, fine.se)
        assert abs(coarse.mean - fine.mean) <= 3 * combined_se

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            McConfig(n_paths=50)
        with pytest.raises(ConfigError):
            McConfig(n_paths=101, antithetic=True)
        with pytest.raises(ConfigError):
            McConfig(steps_per_year=5)
        with pytest.raises(ConfigError):
            mc_phi_physical(SLOU, 0.04, 0.0, 10.0, SMALL)  # at the floor


class TestSurvivorPremium:
    def test_deterministic_single_life_value(self):
        model = HazardModel.constant(0.05, 0.0)
        prem = mc_survivor_premium(model, 1, 0.1, 0.0, 10.0, SMALL, 0.05)
        p = math.exp(-0.5)
        assert prem.per_risk == pytest.approx(p + 0.1 * math.sqrt(p * (1 - p)),
                                              abs=1e-12)
        assert prem.var_conditional_mean == 0.0
        assert prem.limit == pytest.approx(p, abs=1e-12)

    def test_per_risk_decreasing_in_n(self):
        prems = [mc_survivor_premium(SLOU, n, 0.1, 0.0, 10.0, SMALL, 0.06)
                 for n in (1, 10, 100)]
        values = [p.per_risk for p in prems]
        assert values[0] > values[1] > values[2]
        assert all(p.per_risk >= p.limit for p in prems)

    def test_limit_formula(self):
        prem = mc_survivor_premium(SLOU, 50, 0.1, 0.0, 10.0, SMALL, 0.06)
        expected = (prem.mean_survival
                    + 0.1 * math.sqrt(prem.var_conditional_mean))
        assert prem.limit == pytest.approx(expected, abs=1e-15)
