import csv
import json

import pytest

from galdnls.cli import ConfigError, RunConfig, dispatch, main, parse_config, serialize_config

TINY = """
experiment = simulate
equation = gal
L = 10
t_end = 0.5
sample_every = 10
"""


def run_main(tmp_path, text, *extra):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text)
    return main([str(cfg), "--override", f"output_dir={tmp_path / 'out'}", *extra])


class TestParse:
    def test_defaults(self):
        cfg = parse_config("experiment = simulate")
        assert (cfg.dt, cfg.tol, cfg.L, cfg.h) == (0.01, 1e-10, 300.0, 1.0)

    def test_comments_and_lists(self):
        cfg = parse_config("experiment = blowup-scan  # scan\nq0_list = 0.2, 0.18\n")
        assert cfg.q0_list == (0.2, 0.18)

    def test_negative_dt_names_key(self):
        with pytest.raises(ConfigError, match="dt"):
            parse_config("experiment = simulate\ndt = -1")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="colour"):
            parse_config("experiment = simulate\ncolour = red")

    def test_type_mismatch(self):
        with pytest.raises(ConfigError, match="sample_every"):
            parse_config("experiment = simulate\nsample_every = 2.5")

    def test_missing_experiment(self):
        with pytest.raises(ConfigError, match="experiment"):
            parse_config("dt = 0.1")

    def test_bad_choice(self):
        with pytest.raises(ConfigError, match="equation"):
            parse_config("experiment = simulate\nequation = kdv")

    def test_round_trip(self):
        cfg = parse_config("experiment = proximity\np1 = 2\np2 = 2\nq0 = 0.4\nt_end = 800\nh_list = 0.3, 0.1")
        assert parse_config(serialize_config(cfg)) == cfg

    def test_override_wins(self):
        cfg = parse_config("experiment = simulate\ndt = 0.1", {"dt": "0.05"})
        assert cfg.dt == 0.05


class TestDispatch:
    def test_zero_horizon(self, tmp_path):
        assert run_main(tmp_path, TINY, "--override", "t_end=0") == 0
        rep = json.loads((tmp_path / "out" / "report.json").read_text())
        assert rep["series"]["gal"]["n_samples"] == 1
        assert rep["series"]["gal"]["last_time"] == 0.0

    def test_byte_identical_reruns(self, tmp_path):
        assert run_main(tmp_path, TINY) == 0
        first = (tmp_path / "out" / "report.json").read_bytes()
        assert run_main(tmp_path, TINY) == 0
        assert (tmp_path / "out" / "report.json").read_bytes() == first

    def test_series_csv_schema(self, tmp_path):
        assert run_main(tmp_path, TINY.replace("gal", "gdnls"), "--override", "dump_states=true") == 0
        with open(tmp_path / "out" / "series_gdnls.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "norm_l2", "norm_linf", "E", "newton_iters"]
        assert len(rows) == 1 + 6
        assert rows[-1][0] == "0.5"
        with open(tmp_path / "out" / "states_gdnls.csv") as fh:
            head = next(csv.reader(fh))
        assert head[:2] == ["t", "re_0"] and head[-1] == "im_19" and len(head) == 41

    def test_full_precision(self, tmp_path):
        assert run_main(tmp_path, TINY) == 0
        with open(tmp_path / "out" / "series_gal.csv") as fh:
            rows = list(csv.reader(fh))
        assert float(rows[1][1]) == pytest.approx(float(rows[1][1]), rel=0)
        assert len(rows[1][1].replace(".", "").lstrip("0")) >= 15

    def test_blowup_is_success(self, tmp_path, capsys):
        text = "experiment = zero-bc\nA = 2\nL = 50\nt_max = 1\nsample_every = 10\n"
        assert run_main(tmp_path, text) == 0
        out = capsys.readouterr().out
        assert "blowup_t=0.0" in out
        rep = json.loads((tmp_path / "out" / "report.json").read_text())
        assert rep["series"]["gal"]["blowup"]["time"] > 0

    def test_config_error_exit(self, tmp_path):
        assert run_main(tmp_path, "experiment = simulate\ndt = -1\n") == 2
        assert main([str(tmp_path / "missing.cfg")]) == 2

    def test_runtime_error_exit(self, tmp_path):
        # 2L is not a multiple of h
        assert run_main(tmp_path, "experiment = simulate\nL = 1.025\nh = 0.1\nt_end = 0\n") == 3

    def test_output_env_override(self, tmp_path, monkeypatch):
        target = tmp_path / "elsewhere"
        monkeypatch.setenv("GALDNLS_OUTPUT_DIR", str(target))
        assert dispatch(parse_config(TINY)) == 0
        assert (target / "report.json").exists()

    def test_lifespan_experiment(self, tmp_path, capsys):
        assert run_main(tmp_path, "experiment = lifespan\nq0 = 0.1\np = 2\n") == 0
        rep = json.loads((tmp_path / "out" / "report.json").read_text())
        assert rep["derived"]["T_dnls"] > 0 and rep["derived"]["T_c"] > 0
        assert "T_gal_X2=" in capsys.readouterr().out

    def test_runconfig_is_frozen(self):
        with pytest.raises(Exception):
            RunConfig("simulate").dt = 1.0
