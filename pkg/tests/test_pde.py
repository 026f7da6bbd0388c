import math

import numpy as np
import pytest

from endowrisk import (ConfigError, Grid, GridRangeError, NonFiniteValueError,
                       NonlinearSource, PicardDivergenceError, SolverConfig,
                       Surface, lambda_derivative, refine_and_estimate_order,
                       solve_terminal_value)


def constant_reaction_source(rate):
    return NonlinearSource(
        diffusion=lambda tau: 0.0,
        advection=lambda ys, tau: np.zeros_like(ys),
        reaction=lambda ys, tau: np.full_like(ys, -rate),
    )


def make_grid(n_y=201, n_tau=1000, horizon=10.0):
    return Grid(-8.0, 1.0, n_y, horizon, n_tau, lambda_floor=0.0)


class TestGrid:
    def test_spacings_and_arrays(self):
        g = Grid(-2.0, 2.0, 5, 1.0, 4, 0.04)
        assert g.dy == pytest.approx(1.0)
        assert g.dtau == pytest.approx(0.25)
        assert g.ys.tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
        assert g.lambdas[2] == pytest.approx(1.04)
        assert g.times[0] == 1.0 and g.times[-1] == 0.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            Grid(1.0, -1.0, 11, 1.0, 10)
        with pytest.raises(ConfigError):
            Grid(-1.0, 1.0, 2, 1.0, 10)
        with pytest.raises(ConfigError):
            Grid(-1.0, 1.0, 11, 0.0, 10)

    def test_for_floor_margin(self):
        g = Grid.for_floor(0.04, [0.06], 10.0, n_y=101, n_tau=10)
        y_eval = math.log(0.02)
        assert g.y_min <= y_eval - 4.0
        assert g.y_max >= y_eval + 4.0
        assert g.y_min == pytest.approx(math.log(0.04e-3))
        assert g.y_max == pytest.approx(math.log(2.0))

    def test_for_floor_zero_floor_uses_eval_points(self):
        g = Grid.for_floor(0.0, [0.01], 10.0, n_y=101, n_tau=10)
        assert g.y_min == pytest.approx(math.log(0.01) - 4.0)
        assert g.y_max == pytest.approx(math.log(0.01) + 4.0)

    def test_refined_nesting(self):
        g = make_grid(101, 50)
        r = g.refined(2)
        assert r.n_y == 201 and r.n_tau == 100
        assert r.ys[0] == g.ys[0] and r.ys[-1] == g.ys[-1]


class TestSolver:
    def test_pure_exponential_decay(self):
        g = make_grid()
        surf = solve_terminal_value(g, SolverConfig(),
                                    lambda ys: np.ones_like(ys),
                                    constant_reaction_source(0.05))
        expected = math.exp(-0.5)
        assert np.max(np.abs(surf.values[:, -1] - expected)) < 1e-4

    def test_zero_terminal_zero_source_stays_zero(self):
        g = make_grid(101, 100)
        src = NonlinearSource(
            diffusion=lambda tau: 0.02,
            advection=lambda ys, tau: np.full_like(ys, 0.3),
            reaction=lambda ys, tau: -np.exp(ys),
        )
        surf = solve_terminal_value(g, SolverConfig(),
                                    lambda ys: np.zeros_like(ys), src)
        assert np.all(surf.values == 0.0)

    def test_terminal_shape_mismatch_rejected(self):
        g = make_grid(101, 10)
        with pytest.raises(ConfigError):
            solve_terminal_value(g, SolverConfig(), lambda ys: ys[:-1],
                                 constant_reaction_source(0.0))

    def test_non_finite_terminal_rejected(self):
        g = make_grid(101, 10)
        with pytest.raises(NonFiniteValueError):
            solve_terminal_value(g, SolverConfig(),
                                 lambda ys: np.full_like(ys, np.inf),
                                 constant_reaction_source(0.0))

    def test_picard_divergence_raises(self):
        g = make_grid(101, 10)
        src = NonlinearSource(
            diffusion=lambda tau: 0.0,
            advection=lambda ys, tau: np.zeros_like(ys),
            reaction=lambda ys, tau: np.zeros_like(ys),
            extra=lambda k, tau, u, p: 1e6 * np.sin(1e4 * u),
            linear=False,
        )
        with pytest.raises(PicardDivergenceError):
            solve_terminal_value(g, SolverConfig(picard_max_iters=10),
                                 lambda ys: np.ones_like(ys), src)

    def test_discrete_comparison(self):
        # ordered terminal data under the same nonlinear source stays ordered
        g = make_grid(161, 200)
        lam = g.lambdas

        def source():
            return NonlinearSource(
                diffusion=lambda tau: 0.02,
                advection=lambda ys, tau: 0.5 * (math.log(0.02) - ys),
                reaction=lambda ys, tau: -lam,
                extra=lambda k, tau, u, p: 0.1 * np.sqrt(
                    np.maximum(0.04 * p * p + lam * u * u, 0.0)),
                linear=False,
            )

        low = solve_terminal_value(g, SolverConfig(),
                                   lambda ys: np.full_like(ys, 0.5), source())
        high = solve_terminal_value(g, SolverConfig(),
                                    lambda ys: np.ones_like(ys), source())
        assert np.max(low.values - high.values) <= 1e-8

    def test_solver_config_validation(self):
        with pytest.raises(ConfigError):
            SolverConfig(picard_tol=0.0)
        with pytest.raises(ConfigError):
            SolverConfig(scheme="explicit")
        with pytest.raises(ConfigError):
            SolverConfig(upwinding="centered")


class TestConvergenceOrder:
    def test_reaction_decay_order(self):
        grids = [Grid(-6.0, 1.0, (51 - 1) * 2 ** i + 1, 10.0, 250 * 2 ** i, 0.0)
                 for i in range(3)]
        order = refine_and_estimate_order(
            lambda g: solve_terminal_value(g, SolverConfig(),
                                           lambda ys: np.ones_like(ys),
                                           constant_reaction_source(0.05)),
            grids, lam=0.05, t=0.0)
        assert order >= 0.9

    def test_heat_kernel_order(self):
        sigma0 = 1.0
        diff = 0.02

        def solve(g):
            src = NonlinearSource(
                diffusion=lambda tau: diff,
                advection=lambda ys, tau: np.zeros_like(ys),
                reaction=lambda ys, tau: np.zeros_like(ys),
            )
            return solve_terminal_value(
                g, SolverConfig(),
                lambda ys: np.exp(-ys ** 2 / (2 * sigma0 ** 2)), src)

        grids = [Grid(-8.0, 8.0, 100 * 2 ** i + 1, 10.0, 50 * 2 ** i, 0.0)
                 for i in range(3)]
        # oracle sanity at the finest grid: widening Gaussian
        fine = solve(grids[-1])
        var = sigma0 ** 2 + 2 * diff * 10.0
        exact = sigma0 / math.sqrt(var) * math.exp(-0.0 / (2 * var))
        assert fine.value_at_y(0.0, 10.0) == pytest.approx(exact, abs=2e-3)
        order = refine_and_estimate_order(solve, grids, lam=math.exp(0.0) , t=0.0)
        assert order >= 0.9

    def test_requires_three_nested_grids(self):
        g = make_grid(51, 50)
        with pytest.raises(ConfigError):
            refine_and_estimate_order(lambda g_: None, [g, g.refined(2)],
                                      0.05, 0.0)
        with pytest.raises(ConfigError):
            refine_and_estimate_order(
                lambda g_: None, [g, g.refined(2), g.refined(3)], 0.05, 0.0)


class TestSurface:
    def test_lambda_derivative_of_constant_is_zero(self):
        g = make_grid(101, 10)
        surf = Surface(g, np.ones((g.n_y, g.n_tau + 1)))
        assert np.all(lambda_derivative(surf).values == 0.0)

    def test_lambda_derivative_of_identity(self):
        # truncation is O(dy^2), so a fine window meets the 1e-6 target
        g = Grid(-1.0, 1.0, 2001, 1.0, 4, 0.0)
        surf = Surface.from_function(g, lambda lam, t: lam)
        deriv = lambda_derivative(surf).values
        assert np.max(np.abs(deriv[1:-1, :] - 1.0)) < 1e-6

    def test_interpolation_linear_exactness_and_range(self):
        g = Grid(-2.0, 2.0, 41, 1.0, 8, 0.0)
        surf = Surface.from_function(g, lambda lam, t: np.log(lam) + 3 * t)
        y, tau = 0.3141, 0.505
        lam = math.exp(y)
        t = 1.0 - tau
        # linear in y at fixed column, linear in tau between columns
        assert surf.value_at(lam, t) == pytest.approx(y + 3 * t, abs=2e-3)
        with pytest.raises(GridRangeError):
            surf.value_at(math.exp(2.5), 0.5)
        with pytest.raises(GridRangeError):
            surf.value_at(1.0, 1.5)

    def test_values_are_immutable(self):
        g = make_grid(51, 5)
        surf = Surface(g, np.zeros((g.n_y, g.n_tau + 1)))
        with pytest.raises(ValueError):
            surf.values[0, 0] = 1.0

    def test_csv_roundtrip(self, tmp_path):
        g = Grid(-1.0, 1.0, 3, 1.0, 2, 0.04)
        surf = Surface.from_function(g, lambda lam, t: lam * (1 + t))
        path = tmp_path / "surface.csv"
        surf.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "y,lambda,tau,t,value"
        assert len(lines) == 1 + 3 * 3
        y, lam, tau, t, value = map(float, lines[1].split(","))
        assert (y, tau) == (-1.0, 0.0)
        assert lam == pytest.approx(0.04 + math.exp(-1.0))
        assert value == pytest.approx(lam * (1 + t))
