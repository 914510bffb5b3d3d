"""CLI contract: output shapes, config precedence, exit codes."""

import json
import math
import re

import pytest

from coalesce.cli import load_config, main
from coalesce.cli import ConfigError

FLOAT_12SIG = re.compile(r"^-?\d\.\d{11}e[+-]\d{2,3}$")


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSpectrumCsv:
    def test_shape_contract(self, capsys):
        code, out, err = run_cli(capsys, "spectrum", "--zeta", "-10",
                                 "--zeta-m", "-50", "--kmin", "5.8",
                                 "--kmax", "6.4", "--points", "2001",
                                 "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        meta = [ln for ln in lines if ln.startswith("#")]
        body = [ln for ln in lines if not ln.startswith("#")]
        assert lines[0].startswith("#")          # metadata block first
        assert any("zeta_m" in ln for ln in meta)
        assert any("version" in ln for ln in meta)
        assert body[0] == "k,T"
        assert len(body) == 1 + 2001
        k_str, t_str = body[1].split(",")
        assert FLOAT_12SIG.match(k_str) and FLOAT_12SIG.match(t_str)

    def test_deterministic_output(self, capsys):
        args = ("spectrum", "--zeta", "-10", "--zeta-m", "-50",
                "--points", "101")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_file_output_atomic_lf(self, capsys, tmp_path):
        target = tmp_path / "spec.csv"
        code, out, _ = run_cli(capsys, "spectrum", "--points", "51",
                               "--output", str(target))
        assert code == 0 and out == ""
        raw = target.read_bytes()
        assert raw.startswith(b"#")
        assert b"\r" not in raw
        leftovers = [p for p in tmp_path.iterdir() if p != target]
        assert leftovers == []


class TestJsonOutputs:
    def test_threshold_value(self, capsys):
        code, out, _ = run_cli(capsys, "threshold", "--zeta", "-10",
                               "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["params"]["subcommand"] == "threshold"
        assert payload["data"]["zeta_m_star"] == pytest.approx(-200.998,
                                                               abs=5e-4)

    def test_report_values(self, capsys):
        code, out, _ = run_cli(capsys, "report", "--zeta", "-10",
                               "--zeta-m", "-196.6", "--format", "json")
        assert code == 0
        data = json.loads(out)["data"]
        assert data["kappa"] == pytest.approx(4.9752e-3, rel=1e-4)
        assert data["delta"] == pytest.approx(5.0864e-3, rel=1e-4)
        assert data["pair_gap"] == pytest.approx(2.12e-3, abs=1e-5)
        assert data["enhancement"] == pytest.approx(4.78, abs=5e-3)

    def test_report_exactly_at_threshold(self, capsys):
        code, out, _ = run_cli(capsys, "report", "--zeta", "-10",
                               "--zeta-m", "-200.9975124224178",
                               "--format", "json")
        assert code == 0
        data = json.loads(out)["data"]
        assert data["pair_gap"] == 0.0
        assert data["enhancement"] is None

    def test_report_above_threshold_returns_nulls(self, capsys):
        code, out, _ = run_cli(capsys, "report", "--zeta", "-10",
                               "--zeta-m", "-300", "--format", "json")
        assert code == 0
        data = json.loads(out)["data"]
        assert data["pair_gap"] is None
        assert data["enhancement"] is None
        assert data["kappa"] > 0

    def test_splitting(self, capsys):
        code, out, _ = run_cli(capsys, "splitting", "--zeta-m", "-1",
                               "--format", "json")
        data = json.loads(out)["data"]
        assert code == 0
        assert data["two_delta"] == pytest.approx(math.pi / 2, rel=1e-12)

    def test_stack(self, capsys):
        code, out, _ = run_cli(capsys, "stack", "--zeta-element", "-1",
                               "--n-layers", "2", "--spacing-grid", "2001",
                               "--format", "json")
        data = json.loads(out)["data"]
        assert code == 0
        assert data["zeta_eff"] == pytest.approx(2 * math.sqrt(2), rel=1e-4)
        assert data["threshold_per_element"] == pytest.approx(10.0, rel=1e-9)

    def test_sensitivity_with_membrane_block(self, capsys):
        code, out, _ = run_cli(capsys, "sensitivity", "--mass", "1e-10",
                               "--mech-freq", str(2 * math.pi * 1e5),
                               "--format", "json")
        data = json.loads(out)["data"]
        assert code == 0
        assert data["enhancement"] == pytest.approx(4.783, rel=1e-3)
        assert data["x_zpf"] == pytest.approx(9.1608e-16, rel=1e-4)


class TestBranchesContract:
    def test_exact_header(self, capsys):
        code, out, _ = run_cli(capsys, "branches", "--xpoints", "3",
                               "--xmin", "-0.001", "--xmax", "0.001")
        assert code == 0
        body = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert body[0] == "x,k_lower,k_upper,T_lower,T_upper"
        assert len(body) == 1 + 3


class TestConfigFile:
    def test_empty_file_uses_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "empty.cfg"
        cfg.write_text("")
        code, out, _ = run_cli(capsys, "threshold", "--config", str(cfg),
                               "--format", "json")
        assert code == 0
        assert json.loads(out)["params"]["zeta"] == -10.0

    def test_flag_overrides_file(self, capsys, tmp_path):
        cfg = tmp_path / "conf.cfg"
        cfg.write_text("zeta = -10\n")
        code, out, _ = run_cli(capsys, "threshold", "--config", str(cfg),
                               "--zeta", "-12", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["params"]["zeta"] == -12.0
        assert payload["data"]["zeta_m_star"] == pytest.approx(
            2 * -12 * math.hypot(12, 1), rel=1e-12)

    def test_file_overrides_default(self, capsys, tmp_path):
        cfg = tmp_path / "conf.cfg"
        cfg.write_text("# comment line\nzeta = -2\n")
        code, out, _ = run_cli(capsys, "threshold", "--config", str(cfg),
                               "--format", "json")
        assert code == 0
        assert json.loads(out)["params"]["zeta"] == -2.0

    def test_malformed_line_exits_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("zeta -10\n")
        code, _, err = run_cli(capsys, "threshold", "--config", str(cfg))
        assert code == 2
        assert "error[config]" in err

    def test_unreadable_file_exits_2(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "threshold", "--config",
                               str(tmp_path / "missing.cfg"))
        assert code == 2
        assert "error[config]" in err

    def test_unknown_key_warns_but_succeeds(self, capsys, tmp_path):
        cfg = tmp_path / "odd.cfg"
        cfg.write_text("zeta = -10\nmystery_knob = 7\n")
        code, _, err = run_cli(capsys, "threshold", "--config", str(cfg),
                               "--format", "json")
        assert code == 0
        assert "unknown config key 'mystery_knob'" in err

    def test_load_config_roundtrip(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("kmin = 5.9\nrefine-tol = 1e-10\n")
        rc = load_config(str(cfg))
        assert rc.values == {"kmin": "5.9", "refine_tol": "1e-10"}
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.cfg"))


class TestExitCodes:
    def test_unknown_flag_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "spectrum", "--no-such-flag", "1")
        assert code == 2

    def test_domain_error_exits_3_with_token(self, capsys):
        code, _, err = run_cli(capsys, "sensitivity", "--zeta", "-10",
                               "--zeta-m", "-250")
        assert code == 3
        line = err.strip().splitlines()[0]
        assert line.startswith("error[divergent-sensitivity]:")

    def test_invalid_parameter_token(self, capsys):
        code, _, err = run_cli(capsys, "peaks", "--refine-tol", "1e-3")
        assert code == 3
        assert err.startswith("error[invalid-parameter]:")

    def test_not_bracketed_token(self, capsys):
        code, _, err = run_cli(capsys, "threshold", "--numeric",
                               "--zm-lo", "-120", "--zm-hi", "-150")
        assert code == 3
        assert err.startswith("error[not-bracketed]:")


class TestFiguresSubcommand:
    def test_fig1_csv_columns(self, capsys):
        code, out, _ = run_cli(capsys, "figures", "fig1")
        assert code == 0
        body = [ln for ln in out.splitlines() if not ln.startswith("#")]
        header = body[0].split(",")
        assert header[0] == "k"
        assert len(body) == 1 + 2001
        assert any(ln.startswith("# annotation markers_0") for ln in
                   out.splitlines())

    def test_threshold_sweep_json(self, capsys):
        code, out, _ = run_cli(capsys, "figures", "threshold-sweep",
                               "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["params"]["zeta_m_merge"] == pytest.approx(
            -200.998, rel=0.05)
        assert set(payload["data"]) >= {"zeta_m", "n_peaks", "T_peak_1"}
