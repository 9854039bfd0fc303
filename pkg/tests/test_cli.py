import json
import math

import numpy as np
import pytest

from ris_street import cli, mean_length
from ris_street.config import ConfigError, load_config


def run_cli(args):
    return cli.main(args)


def write_cfg(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_csv(path):
    meta, header, rows = [], None, []
    for line in open(path):
        line = line.rstrip("\n")
        if line.startswith("#"):
            meta.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows


BASE = {
    "geometry": {"rho": 20.0},
    "env": {"gamma1": 0.5, "gamma2": 0.5},
    "mc": {"n_trials": 4000, "seed": 1, "threads": 2},
}


class TestConfig:
    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown top-level"):
            load_config(None, text=json.dumps({"geom": {}}))

    def test_unknown_section_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys in env"):
            load_config(None, text=json.dumps({"env": {"gamma1": 1.0, "gama2": 1.0}}))

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            load_config(None, text=json.dumps({"env": {"gamma1": -1.0}}))
        with pytest.raises(ConfigError):
            load_config(None, text=json.dumps({"geometry": {"rho": 0.5}}))
        with pytest.raises(ConfigError):
            load_config(None, text=json.dumps({"sweep": {"grid": []}}))

    def test_defaults_are_flagged(self):
        cfg = load_config(None, text=json.dumps({"env": {"gamma1": 0.5}}))
        joined = " ".join(cfg.defaults_used)
        assert "geometry.l=10.0" in joined
        assert "env.gamma2=0.5" in joined
        assert "sinr.x=10.0" in joined

    def test_exit_code_on_bad_config(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"bogus": 1})
        assert run_cli(["mean-length", "--config", path]) == 2
        assert run_cli(["mean-length", "--config", str(tmp_path / "nope.json")]) == 2


class TestMeanLengthCommand:
    def test_single_point_rows(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        out = str(tmp_path / "ml.csv")
        assert run_cli(["mean-length", "--config", cfg, "--out", out]) == 0
        meta, header, rows = read_csv(out)
        assert header == ["method", "value", "stderr", "r", "terms", "n_trials"]
        by_method = {r[0]: r for r in rows}
        assert set(by_method) == {"series", "closed_form", "approx", "mc"}
        closed = float(by_method["closed_form"][1])
        assert closed == pytest.approx(20.512820512820511, rel=1e-12)
        assert float(by_method["series"][1]) == pytest.approx(closed, rel=1e-6)
        assert float(by_method["approx"][1]) == pytest.approx(closed, rel=1e-12)
        mc = float(by_method["mc"][1])
        se = float(by_method["mc"][2])
        assert abs(mc - closed) < 4.0 * se
        assert any("config-sha256" in m for m in meta)
        assert any("seed: 1" in m for m in meta)

    def test_alpha_sweep_monotone(self, tmp_path):
        doc = dict(BASE)
        doc["mc"] = {"n_trials": 0, "seed": 1}
        doc["sweep"] = {"variable": "alpha", "grid": [0.1, 0.3, 1.0, 3.0, 10.0]}
        cfg = write_cfg(tmp_path, doc)
        out = str(tmp_path / "sweep.csv")
        assert run_cli(["mean-length", "--config", cfg, "--out", out]) == 0
        _, header, rows = read_csv(out)
        i = header.index("el_closed_form")
        vals = [float(r[i]) for r in rows]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert [float(r[0]) for r in rows] == [0.1, 0.3, 1.0, 3.0, 10.0]

    def test_gap0_flag_changes_series_and_mc(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        out1 = str(tmp_path / "g1.csv")
        out0 = str(tmp_path / "g0.csv")
        assert run_cli(["mean-length", "--config", cfg, "--out", out1]) == 0
        assert run_cli(["mean-length", "--config", cfg, "--out", out0,
                        "--include-gap0", "false"]) == 0
        v1 = {r[0]: float(r[1]) for _, _, rows in [read_csv(out1)] for r in rows}
        v0 = {r[0]: float(r[1]) for _, _, rows in [read_csv(out0)] for r in rows}
        # dropping the origin gap removes the r^0 term: 1/gamma1 = 2 here
        assert v1["series"] - v0["series"] == pytest.approx(2.0, rel=1e-9)
        assert v1["mc"] > v0["mc"]

    def test_seed_determinism_bytes(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        run_cli(["mean-length", "--config", cfg, "--out", a])
        run_cli(["mean-length", "--config", cfg, "--out", b])
        assert open(a, "rb").read() == open(b, "rb").read()


class TestSinrSweepCommand:
    CFG = {
        "geometry": {"rho": 20.0},
        "env": {"gamma1": 0.5, "gamma2": 0.5},
        "radio": {"lambda": 0.2},
        "mc": {"seed": 2, "threads": 2},
        "sinr": {"theta_grid": [0.1, 1.0, 25.0], "n_trials_h0": 20000,
                 "n_configs_dependent": 8000},
    }

    def test_columns_and_content(self, tmp_path):
        cfg = write_cfg(tmp_path, self.CFG)
        out = str(tmp_path / "s.csv")
        assert run_cli(["sinr-sweep", "--config", cfg, "--out", out]) == 0
        meta, header, rows = read_csv(out)
        assert header == ["theta", "p_analytic", "p_mc_h0", "p_mc_h0_stderr",
                          "p_mc_dep", "p_mc_dep_stderr", "acceptance_rate",
                          "n_trials", "seed"]
        assert [float(r[0]) for r in rows] == [0.1, 1.0, 25.0]
        pa = [float(r[1]) for r in rows]
        assert all(x > y for x, y in zip(pa, pa[1:]))  # decreasing in theta
        assert pa[0] > 0.6
        rate = float(rows[0][6])
        assert 0.0 < rate <= 1.0
        assert any("acceptance-rate" in m for m in meta)
        assert any("artifact-defaults" in m for m in meta)
        assert any("intensity-convention: full" in m for m in meta)

    def test_zero_intensity_gives_ones(self, tmp_path):
        doc = json.loads(json.dumps(self.CFG))
        doc["radio"]["lambda"] = 0.0
        doc["sinr"]["n_configs_dependent"] = 500
        cfg = write_cfg(tmp_path, doc)
        out = str(tmp_path / "z.csv")
        assert run_cli(["sinr-sweep", "--config", cfg, "--out", out]) == 0
        _, _, rows = read_csv(out)
        for r in rows:
            assert float(r[1]) == 1.0 and float(r[2]) == 1.0 and float(r[4]) == 1.0

    def test_thinned_intensity_flag(self, tmp_path):
        cfg = write_cfg(tmp_path, self.CFG)
        out_f = str(tmp_path / "f.csv")
        out_t = str(tmp_path / "t.csv")
        run_cli(["sinr-sweep", "--config", cfg, "--out", out_f])
        run_cli(["sinr-sweep", "--config", cfg, "--out", out_t,
                 "--use-thinned-intensity", "true"])
        pa_f = float(read_csv(out_f)[2][1][1])
        pa_t = float(read_csv(out_t)[2][1][1])
        assert pa_t > pa_f  # thinning halves the interference here

    def test_acceptance_rate_error_exit_code(self, tmp_path):
        doc = json.loads(json.dumps(self.CFG))
        doc["env"] = {"gamma1": 50.0, "gamma2": 0.1}
        doc["sinr"]["n_configs_dependent"] = 1500
        doc["sinr"]["n_trials_h0"] = 1000
        cfg = write_cfg(tmp_path, doc)
        assert run_cli(["sinr-sweep", "--config", cfg,
                        "--out", str(tmp_path / "x.csv")]) == 3


class TestEnvSampleCommand:
    def test_format_and_occupancy(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        out = str(tmp_path / "env.csv")
        assert run_cli(["env-sample", "--config", cfg, "--out", out]) == 0
        meta, header, rows = read_csv(out)
        assert header == ["B", "E"]
        b = np.array([float(r[0]) for r in rows])
        e = np.array([float(r[1]) for r in rows])
        assert b[0] > 0
        assert np.all(e > b)
        assert np.all(b[1:] > e[:-1])
        window = 2000.0
        frac = np.sum(np.clip(e, None, window) - b) / window
        assert abs(frac - 0.5) < 0.06  # gamma1/(gamma1+gamma2) = 1/2

    def test_seed_determinism(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        run_cli(["env-sample", "--config", cfg, "--out", a])
        run_cli(["env-sample", "--config", cfg, "--out", b])
        assert open(a, "rb").read() == open(b, "rb").read()
        c = str(tmp_path / "c.csv")
        run_cli(["env-sample", "--config", cfg, "--seed", "99", "--out", c])
        assert open(a, "rb").read() != open(c, "rb").read()


class TestSelftestCommand:
    def test_passes_cleanly(self, capsys):
        import time
        start = time.monotonic()
        assert run_cli(["selftest"]) == 0
        assert time.monotonic() - start < 60.0
        out = capsys.readouterr().out
        assert "selftest: PASS" in out

    def test_detects_perturbed_closed_form(self, monkeypatch, capsys):
        original = mean_length.gap_mean_scenario1
        monkeypatch.setattr(mean_length, "gap_mean_scenario1",
                            lambda *a, **k: 1.001 * original(*a, **k))
        monkeypatch.setattr(mean_length, "_closed_forms_verified", False)
        assert run_cli(["selftest"]) == 4
        out = capsys.readouterr().out
        assert "FAIL" in out
        monkeypatch.setattr(mean_length, "_closed_forms_verified", False)
