import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endowrisk import ConfigError, HazardModel
from endowrisk.hazard import MIN_STOCHASTIC_VOL, _boundary_blowup, validate
from endowrisk.pde import Grid

SLOU = dict(theta=math.log(0.02), kappa_y=0.5, b0=0.2, lambda_floor=0.04)


def grid_for(floor, horizon=10.0):
    return Grid.for_floor(floor, [floor + 0.02 if floor else 0.01], horizon,
                          n_y=201, n_tau=100)


class TestDrift:
    def test_constant_hazard_has_zero_drift(self):
        model = HazardModel.constant(0.05, 0.04)
        assert model.drift(0.07, 1.0) == 0.0

    def test_exponential_drift_value(self):
        model = HazardModel.deterministic_exponential(0.01, 0.08, 0.0)
        assert model.drift(0.01, 0.0) == pytest.approx(0.0008, abs=1e-15)

    def test_log_ou_drift_at_mean_level(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        # at y = theta only the b0^2/2 term survives: 0.02 * 0.02
        assert model.drift(0.04 + 0.02, 3.0) == pytest.approx(0.0004, abs=1e-15)

    def test_rejects_hazard_at_or_below_floor(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        with pytest.raises(ValueError):
            model.drift(0.04, 0.0)
        with pytest.raises(ValueError):
            model.drift_deriv(0.03, 0.0)

    def test_vectorized_matches_scalar(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        lams = np.array([0.05, 0.06, 0.10])
        vec = model.drift(lams, 0.0)
        assert vec == pytest.approx([model.drift(l, 0.0) for l in lams])


class TestVol:
    @pytest.mark.parametrize("model", [
        HazardModel.constant(0.05, 0.0),
        HazardModel.deterministic_exponential(0.05, 0.08, 0.04),
    ])
    def test_deterministic_kinds_have_zero_vol(self, model):
        assert model.vol(0.05) == 0.0
        assert model.vol_level(0.3) == 0.0

    def test_vanishes_exactly_at_the_floor(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        assert model.vol(0.04) == 0.0

    def test_log_ou_vol_value(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        assert model.vol(0.09) == pytest.approx(0.01, abs=1e-15)


class TestDriftDeriv:
    def test_constant(self):
        assert HazardModel.constant(0.05, 0.04).drift_deriv(0.05001) == 0.0

    def test_exponential_is_the_growth_rate(self):
        model = HazardModel.deterministic_exponential(0.01, 0.08, 0.0)
        assert model.drift_deriv(0.017) == pytest.approx(0.08, abs=1e-15)

    def test_log_ou_at_mean_level(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        assert model.drift_deriv(0.06) == pytest.approx(
            0.2 ** 2 / 2 - 0.5, abs=1e-12)

    @pytest.mark.parametrize("model", [
        HazardModel.shifted_log_ou(**SLOU),
        HazardModel.deterministic_exponential(0.05, 0.08, 0.04),
        HazardModel.constant(0.05, 0.04),
    ])
    def test_matches_finite_difference(self, model):
        for lam in np.geomspace(0.045, 1.5, 40):
            h = 1e-6 * max(lam - model.lambda_floor, 1e-3)
            fd = (model.drift(lam + h, 0.0) - model.drift(lam - h, 0.0)) / (2 * h)
            exact = model.drift_deriv(lam, 0.0)
            assert fd == pytest.approx(exact, rel=1e-6, abs=1e-12)


class TestDriftY:
    @given(st.floats(min_value=-8.0, max_value=0.5))
    @settings(max_examples=200, deadline=None)
    def test_consistent_with_drift(self, y):
        model = HazardModel.shifted_log_ou(**SLOU)
        lam = model.lambda_floor + math.exp(y)
        expected = (model.drift(lam, 0.0) / (lam - model.lambda_floor)
                    - 0.5 * model.vol_level(0.0) ** 2)
        assert model.drift_y(y, 0.0) == pytest.approx(expected, rel=1e-12,
                                                      abs=1e-14)

    def test_sign_condition(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        threshold = SLOU["theta"] + SLOU["b0"] ** 2 / (2 * SLOU["kappa_y"])
        for y in np.linspace(-9.0, threshold - 1e-6, 50):
            lam = 0.04 + math.exp(y)
            assert model.drift(lam, 0.0) > 0.0
        lam_above = 0.04 + math.exp(threshold + 0.1)
        assert model.drift(lam_above, 0.0) < 0.0


class TestConstruction:
    def test_log_ou_requires_positive_floor(self):
        with pytest.raises(ConfigError):
            HazardModel.shifted_log_ou(math.log(0.02), 0.5, 0.2, 0.0)

    def test_log_ou_requires_vol_above_minimum(self):
        with pytest.raises(ConfigError):
            HazardModel.shifted_log_ou(math.log(0.02), 0.5,
                                       MIN_STOCHASTIC_VOL / 2, 0.04)

    def test_initial_hazard_must_exceed_floor(self):
        with pytest.raises(ConfigError):
            HazardModel.constant(0.04, 0.04)
        with pytest.raises(ConfigError):
            HazardModel.deterministic_exponential(0.03, 0.08, 0.04)

    def test_drift_vol_decoupling(self):
        tied = HazardModel.shifted_log_ou(**SLOU)
        pinned = HazardModel.shifted_log_ou(math.log(0.02), 0.5, 0.15, 0.04,
                                            drift_vol=0.2)
        assert pinned.drift(0.06, 0.0) == tied.drift(0.06, 0.0)
        assert pinned.vol(0.06, 0.0) < tied.vol(0.06, 0.0)


class TestValidate:
    def test_alpha_boundary_passes(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        report = validate(model, 0.2, grid_for(0.04))
        assert report.passed

    def test_alpha_above_sqrt_floor_fails(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        report = validate(model, 0.25, grid_for(0.04))
        assert not report.passed
        assert "alpha exceeds sqrt(lambda_floor)" in report.first_failure.detail

    def test_default_model_growth_bounds(self):
        model = HazardModel.shifted_log_ou(**SLOU)
        report = validate(model, 0.1, grid_for(0.04))
        assert report.passed
        assert report.growth_constant_drift < 5.0
        assert report.growth_constant_drift_deriv < 5.0

    def test_constant_hazard_passes(self):
        report = validate(HazardModel.constant(0.05, 0.04), 0.1, grid_for(0.04))
        assert report.passed

    def test_blowup_detector_flags_divergent_ratio(self):
        # the profile of |c (m - lambda)| against the admissible bound: the
        # ratio diverges like 1/(gap |ln gap|) toward the lower boundary
        y = np.linspace(-10, 0.7, 200)
        gap = np.exp(y)
        ratio = np.abs(0.5 * (0.05 - (0.04 + gap))) / (gap * (1 + np.abs(y)))
        assert _boundary_blowup(y, ratio)

    def test_blowup_detector_accepts_bounded_ratio(self):
        y = np.linspace(-10, 0.7, 200)
        ratio = np.abs(0.5 * (math.log(0.02) - y) + 0.02) / (1 + np.abs(y))
        assert not _boundary_blowup(y, ratio)
