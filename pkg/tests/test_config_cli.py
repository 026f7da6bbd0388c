import json
import math

import pytest

from endowrisk import cli
from endowrisk.config import RunConfig, from_dict, load, preset
from endowrisk.errors import ConfigError
from endowrisk.hazard import HazardKind


def base_config(**overrides):
    data = {
        "schema": 1,
        "scenario": "custom",
        "hazard": {"kind": "constant", "lambda_floor": 0.04, "lambda0": 0.05},
        "bond": {"kind": "constant", "r": 0.03},
        "alpha": 0.1,
        "horizon": 10.0,
        "eval": {"r": 0.03, "lambda": 0.05, "t": 0.0},
    }
    data.update(overrides)
    return data


class TestConfig:
    def test_presets(self):
        cfg = preset("default")
        assert cfg.hazard.kind is HazardKind.SHIFTED_LOG_OU
        assert cfg.eval_lambda == 0.06
        det = preset("deterministic")
        assert det.is_deterministic
        with pytest.raises(ConfigError):
            preset("nonsense")

    def test_minimal_file_roundtrip(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(base_config()))
        cfg = load(path)
        assert cfg.alpha == 0.1
        assert cfg.hazard.params.lambda0 == 0.05
        assert cfg.n_y == 401 and cfg.n_tau == 2000

    def test_unknown_keys_rejected_at_every_level(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            from_dict(base_config(bogus=1))
        with pytest.raises(ConfigError, match="unknown keys"):
            from_dict(base_config(hazard={"kind": "constant",
                                          "lambda_floor": 0.04,
                                          "lambda0": 0.05, "oops": 2}))
        with pytest.raises(ConfigError, match="unknown keys"):
            from_dict(base_config(grid={"n_y": 101, "n_x": 5}))
        with pytest.raises(ConfigError, match="unknown keys"):
            from_dict(base_config(eval={"r": 0.03, "lambda": 0.05, "t": 0.0,
                                        "z": 1}))

    def test_schema_version_enforced(self):
        with pytest.raises(ConfigError, match="schema"):
            from_dict(base_config(schema=2))

    def test_missing_required_keys(self):
        data = base_config()
        del data["alpha"]
        with pytest.raises(ConfigError, match="alpha"):
            from_dict(data)

    def test_vasicek_and_slou_parsing(self):
        data = base_config(
            hazard={"kind": "shifted_log_ou", "lambda_floor": 0.04,
                    "theta": math.log(0.02), "kappa_y": 0.5, "b0": 0.2},
            bond={"kind": "vasicek", "k": 0.3, "m": 0.05, "sigma0": 0.01},
            eval={"r": 0.03, "lambda": 0.06, "t": 0.0})
        cfg = from_dict(data)
        assert not cfg.is_deterministic
        assert cfg.bond.params.k == 0.3

    def test_tolerance_overrides(self):
        cfg = from_dict(base_config(
            tolerances={"eq_2_16_sharpe_identity": 0.05}))
        assert cfg.tolerances["eq_2_16_sharpe_identity"] == 0.05
        with pytest.raises(ConfigError):
            from_dict(base_config(tolerances={"x": -1.0}))

    def test_scenario_conflict(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(base_config()))
        with pytest.raises(ConfigError, match="conflicts"):
            load(path, scenario="default")

    def test_eval_point_must_exceed_floor(self):
        with pytest.raises(ConfigError):
            from_dict(base_config(eval={"r": 0.03, "lambda": 0.04, "t": 0.0}))

    def test_bad_json_reported(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load(path)


class TestCli:
    def test_price_at_horizon_prints_n(self, tmp_path, capsys):
        code = cli.main(["price", "--scenario", "default", "--t", "10",
                         "--n", "7", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "7.0000000000" in out
        assert (tmp_path / "price.csv").exists()

    def test_price_matches_closed_form_product(self, tmp_path, capsys):
        config = tmp_path / "det.json"
        config.write_text(json.dumps(base_config(
            alpha=0.0,
            hazard={"kind": "constant", "lambda_floor": 0.0, "lambda0": 0.05},
            grid={"n_y": 201, "n_tau": 2000},
            eval={"r": 0.03, "lambda": 0.05, "t": 5.0})))
        code = cli.main(["price", "--config", str(config),
                         "--out", str(tmp_path)])
        assert code == 0
        line = (tmp_path / "price.csv").read_text().splitlines()[1]
        price = float(line.split(",")[4])
        assert price == pytest.approx(math.exp(-0.15) * math.exp(-0.25),
                                      abs=1e-4)

    def test_out_of_grid_lambda_exits_2(self, tmp_path, capsys):
        code = cli.main(["price", "--scenario", "default", "--lam", "9.0",
                         "--out", str(tmp_path)])
        err = capsys.readouterr().err
        assert code == 2
        assert "lambda range" in err

    def test_bad_config_exits_2(self, tmp_path, capsys):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps(base_config(schema=99)))
        code = cli.main(["price", "--config", str(config)])
        assert code == 2

    def test_fuzz_lemmas(self, tmp_path, capsys):
        code = cli.main(["fuzz-lemmas", "--samples", "2000", "--seed", "5",
                         "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("[PASS]") == 3
        assert (tmp_path / "fuzz.csv").exists()

    def test_decompose_identity(self, tmp_path, capsys):
        config = tmp_path / "det.json"
        config.write_text(json.dumps(base_config(
            grid={"n_y": 161, "n_tau": 400})))
        code = cli.main(["decompose", "--config", str(config), "--n", "2",
                         "--out", str(tmp_path)])
        assert code == 0
        row = (tmp_path / "decompose.csv").read_text().splitlines()[1]
        _, per_risk, neutral, fin, stoch, total = map(float, row.split(","))
        assert fin + stoch == pytest.approx(total, abs=1e-10)
        assert abs(stoch) <= 1e-6  # deterministic hazard

    def test_ladder_columns_and_monotonicity(self, tmp_path, capsys):
        config = tmp_path / "small.json"
        config.write_text(json.dumps(base_config(
            hazard={"kind": "shifted_log_ou", "lambda_floor": 0.04,
                    "theta": math.log(0.02), "kappa_y": 0.5, "b0": 0.2},
            eval={"r": 0.03, "lambda": 0.06, "t": 0.0},
            grid={"n_y": 161, "n_tau": 400})))
        code = cli.main(["ladder", "--config", str(config), "--n-max", "5",
                         "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "ladder.csv").read_text().splitlines()
        assert lines[0] == "n,zeta,gamma_per_risk,beta,rate_bound"
        rows = [list(map(float, line.split(","))) for line in lines[1:]]
        zetas = [r[1] for r in rows]
        assert all(a >= b for a, b in zip(zetas, zetas[1:]))
        for _, zeta, gamma_pr, beta_v, bound in rows:
            assert beta_v <= zeta + 1e-9 <= gamma_pr + 2e-9
            assert gamma_pr - beta_v <= bound + 1e-4

    def test_sweep_alpha_monotone(self, tmp_path, capsys):
        config = tmp_path / "small.json"
        config.write_text(json.dumps(base_config(
            grid={"n_y": 161, "n_tau": 400})))
        code = cli.main(["sweep", "--config", str(config), "--values",
                         "0,0.1,0.2", "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()[1:]
        phis = [float(line.split(",")[1]) for line in lines]
        assert phis[0] < phis[1] < phis[2]

    def test_sweep_rejects_unknown_parameter(self, capsys):
        code = cli.main(["sweep", "--scenario", "default", "--param", "beta",
                         "--values", "1,2"])
        assert code == 2

    def test_verify_reports_alpha_violation_before_solving(self, tmp_path,
                                                           capsys):
        config = tmp_path / "bad_alpha.json"
        config.write_text(json.dumps(base_config(alpha=0.25)))
        code = cli.main(["verify", "--config", str(config),
                         "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 1
        assert "model_validation" in out
        lines = (tmp_path / "checks.csv").read_text().splitlines()
        assert len(lines) == 2  # header plus the single failed check
        assert "false" in lines[1]
