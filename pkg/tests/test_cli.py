import json
import re
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from nvcdd import cli
from nvcdd.cli import ConfigError, load_config, main, resolve_config

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args, **kwargs):
    result = runner.invoke(main, args, catch_exceptions=False, **kwargs)
    return result


def all_output(result):
    text = result.output
    try:
        text += result.stderr
    except ValueError:
        pass
    return text


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def grab(report: str, label: str) -> float:
    for line in report.splitlines():
        if line.startswith(label):
            return float(re.search(r"(-?\d+\.?\d*)", line.split(":")[1])
                         .group(1))
    raise AssertionError(f"no line starting with {label!r} in:\n{report}")


class TestRates:
    def test_default_preset_anchors(self, runner, tmp_path):
        result = invoke(runner, ["--out", str(tmp_path), "rates"])
        assert result.exit_code == 0
        assert grab(result.output, "omega/2pi") == pytest.approx(581.0)
        assert grab(result.output, "gamma*sigma_b/2pi") == pytest.approx(
            42.0, abs=0.1)
        assert grab(result.output, "sigma_Omega/2pi") == pytest.approx(
            0.0, abs=1e-9)
        assert grab(result.output, "thermal-limit T2*") == pytest.approx(
            12.17, abs=0.05)
        assert grab(result.output, "mech cutoff w_c/2pi") == pytest.approx(
            108.52, abs=0.1)
        assert grab(result.output, "T2*_mp (first)") == pytest.approx(
            10.72, abs=0.1)
        assert grab(result.output, "T2*_mp (second)") == pytest.approx(
            13.5, abs=0.2)
        saved = (tmp_path / "rates.txt").read_text()
        assert saved.strip() == result.output.strip()

    def test_reflectometer_config_anchors(self, runner, tmp_path):
        result = invoke(runner, ["--config", str(CONFIG_DIR / "nv2.json"),
                                 "--out", str(tmp_path), "rates"])
        assert result.exit_code == 0
        assert grab(result.output, "sigma_Omega/2pi") == pytest.approx(
            21.95, abs=0.1)
        assert grab(result.output, "T2*_mp (first)") == pytest.approx(
            5.33, abs=0.05)


class TestConfigHandling:
    def test_bad_type_reports_key_path(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"system": {"omega_khz": "high"}})
        result = invoke(runner, ["--config", cfg, "rates"])
        assert result.exit_code == 2
        text = all_output(result)
        assert "omega_khz" in text and "config" in text

    def test_unknown_key_rejected(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"turbo": True})
        result = invoke(runner, ["--config", cfg, "rates"])
        assert result.exit_code == 2

    def test_invalid_json_reports_line(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\n  \"preset\": nv2\n}", encoding="utf-8")
        result = invoke(runner, ["--config", str(path), "rates"])
        assert result.exit_code == 2
        assert ":2:" in all_output(result)

    def test_missing_config_file(self, runner, tmp_path):
        result = invoke(runner, ["--config", str(tmp_path / "nope.json"),
                                 "rates"])
        assert result.exit_code == 2

    def test_example_configs_validate(self):
        for name in ("nv1.json", "nv2.json"):
            cfg = load_config(CONFIG_DIR / name)
            resolved = resolve_config(cfg)
            assert resolved["shots"] > 0

    def test_config_round_trips_through_json(self):
        cfg = load_config(CONFIG_DIR / "nv2.json")
        again = json.loads(json.dumps(cfg))
        assert again == cfg

    def test_committed_schema_matches_embedded(self):
        on_disk = (CONFIG_DIR / "schema.json").read_text(encoding="utf-8")
        assert on_disk == json.dumps(cli.SCHEMA, indent=2) + "\n"

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="preset"):
            resolve_config({"preset": "nv3"})


class TestT2Scan:
    def test_columns_and_anchors(self, runner, tmp_path):
        result = invoke(runner, ["--out", str(tmp_path), "t2scan",
                                 "--omega-khz", "581", "--no-mc"])
        assert result.exit_code == 0
        lines = (tmp_path / "t2scan.csv").read_text().splitlines()
        assert lines[0] == "omega_khz,t2_first_us,t2_second_us,t2_mc_us,mc_err_us"
        om, first, second, mc, err = (float(v) for v in lines[1].split(","))
        assert om == 581.0
        assert first == pytest.approx(10.72, abs=0.1)
        assert second == pytest.approx(13.5, abs=0.2)
        assert np.isnan(mc) and np.isnan(err)

    def test_empty_omega_list_is_config_error(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"t2scan": {"omega_list_khz": []}})
        result = invoke(runner, ["--config", cfg, "--out", str(tmp_path),
                                 "t2scan"])
        assert result.exit_code == 2

    def test_numerical_failure_exit_code(self, runner, tmp_path):
        # noise so weak the envelope never reaches 1/e inside the horizon
        cfg = write_config(tmp_path, {
            "noise": {"gamma_sigma_b_khz": 1e-9, "sigma_t_c": 0.25}})
        result = invoke(runner, ["--config", cfg, "--out", str(tmp_path),
                                 "t2scan", "--omega-khz", "581", "--no-mc"])
        assert result.exit_code == 3


class TestRamseyAndFit:
    def test_trace_fft_and_fit_round_trip(self, runner, tmp_path):
        out = tmp_path / "run"
        result = invoke(runner, ["--out", str(out), "--shots", "60",
                                 "--seed", "11", "ramsey",
                                 "--kind", "dressed_mp",
                                 "--tau-stop-us", "15",
                                 "--tau-step-us", "0.05"])
        assert result.exit_code == 0
        trace_csv = out / "ramsey_dressed_mp.csv"
        assert trace_csv.exists()
        assert (out / "ramsey_dressed_mp.csv.meta.json").exists()
        fft_lines = (out / "ramsey_dressed_mp_fft.csv").read_text().splitlines()
        assert fft_lines[0] == "freq_khz,magnitude"

        result = invoke(runner, ["--out", str(out), "fit",
                                 "--model", "ramsey_mp",
                                 "--input", str(trace_csv)])
        assert result.exit_code == 0, all_output(result)
        report = (out / "fit_ramsey_mp.txt").read_text()
        assert "converged: True" in report
        omega = float(re.search(r"omega_khz\s+(\S+)", report).group(1))
        assert omega == pytest.approx(581.0, abs=20.0)

    def test_bit_identical_rerun(self, runner, tmp_path):
        args = ["--shots", "25", "--seed", "4", "ramsey",
                "--kind", "dressed_mp", "--tau-stop-us", "5",
                "--tau-step-us", "0.1"]
        invoke(runner, ["--out", str(tmp_path / "a")] + args)
        invoke(runner, ["--out", str(tmp_path / "b")] + args)
        first = (tmp_path / "a" / "ramsey_dressed_mp.csv").read_bytes()
        second = (tmp_path / "b" / "ramsey_dressed_mp.csv").read_bytes()
        assert first == second

    def test_fit_missing_input_is_io_error(self, runner, tmp_path):
        result = invoke(runner, ["--out", str(tmp_path), "fit",
                                 "--model", "ramsey_mp",
                                 "--input", str(tmp_path / "missing.csv")])
        assert result.exit_code == 4

    def test_fit_needs_model_and_input(self, runner, tmp_path):
        result = invoke(runner, ["--out", str(tmp_path), "fit"])
        assert result.exit_code == 2


class TestSpectraAndEnvelope:
    def test_spectra_one_file_per_drive(self, runner, tmp_path):
        cfg = write_config(tmp_path, {
            "spectra": {"omega_list_khz": [0.0, 470.0],
                        "detuning_start_khz": -500.0,
                        "detuning_stop_khz": 500.0,
                        "detuning_step_khz": 25.0}})
        result = invoke(runner, ["--config", cfg, "--out", str(tmp_path),
                                 "--shots", "1", "spectra"])
        assert result.exit_code == 0
        assert (tmp_path / "spectrum_omega0khz.csv").exists()
        assert (tmp_path / "spectrum_omega470khz.csv").exists()

    def test_envelope_columns(self, runner, tmp_path):
        result = invoke(runner, ["--out", str(tmp_path), "envelope",
                                 "--tau-stop-us", "10"])
        assert result.exit_code == 0
        lines = (tmp_path / "envelope.csv").read_text().splitlines()
        assert lines[0] == "tau_us,second_order,max_protection,gaussian_first"
        first_row = [float(v) for v in lines[1].split(",")]
        assert first_row[1] == pytest.approx(1.0, abs=1e-9)
