from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orthosim.cli import cli_main
from orthosim.config import SessionConfig, config_from_dict, load_config
from orthosim.control import Twa
from orthosim.errors import ConfigError, InvalidInputError
from orthosim.logio import TickLogRow, format_float, read_log, write_log
from orthosim.trials import run_max_force, run_modulation_trial, compute_targets


class TestConfigDefaults:
    def test_minimal_config_applies_defaults(self, tmp_path):
        path = tmp_path / "session.json"
        path.write_text(json.dumps({"mode": "twa"}))
        cfg = load_config(path)
        assert cfg.mode == "twa"
        assert cfg.thresholds.open_deg == -15.0
        assert cfg.thresholds.close_deg == 15.0
        assert cfg.tick_rate == 100.0
        assert cfg.plant.instrument.sensor_resolution == 0.28

    def test_empty_config_is_fully_defaulted(self):
        cfg = config_from_dict({})
        assert cfg.mode == "twa"
        assert cfg.plant.tenodesis.max_force == pytest.approx(10.5)

    def test_calibration_solves_from_anchor_overrides(self):
        cfg = config_from_dict(
            {"plant": {"anchors": {"with_device_force": 16.0}}}
        )
        full_device = cfg.plant.contact.device_stiffness * (
            1.0 - cfg.plant.contact.contact_excursion
        )
        ten_25 = cfg.plant.tenodesis.max_force * (25.0 - 18.0) / (40.0 - 18.0)
        assert ten_25 + full_device == pytest.approx(16.0, abs=1e-9)

    def test_explicit_plant_constants_bypass_anchors(self):
        cfg = config_from_dict(
            {"plant": {"tenodesis_max_force": 8.0, "device_stiffness": 10.0}}
        )
        assert cfg.plant.tenodesis.max_force == 8.0
        assert cfg.plant.contact.device_stiffness == 10.0
        assert cfg.anchors is None


class TestConfigValidation:
    def test_positive_open_threshold_rejected(self):
        with pytest.raises(ConfigError, match="open"):
            config_from_dict({"thresholds": {"open_deg": 5.0}})

    def test_zero_tick_rate_rejected(self):
        with pytest.raises(ConfigError, match="tick_rate"):
            config_from_dict({"tick_rate": 0})

    def test_unknown_key_rejected_with_its_name(self):
        with pytest.raises(ConfigError, match="typo_key"):
            config_from_dict({"typo_key": 1})

    def test_unknown_nested_key_rejected_with_path(self):
        with pytest.raises(ConfigError, match=r"participant\.typo"):
            config_from_dict({"participant": {"typo": 1}})

    def test_parse_error_reports_line_and_column(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "mode": twa\n}')
        with pytest.raises(ConfigError, match=r"line 2 column"):
            load_config(path)

    def test_missing_file_is_a_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_bad_mode_rejected(self):
        with pytest.raises(ConfigError, match="mode"):
            config_from_dict({"mode": "emg"})

    def test_half_explicit_plant_rejected(self):
        with pytest.raises(ConfigError, match="together"):
            config_from_dict({"plant": {"tenodesis_max_force": 8.0}})

    def test_wrong_type_reports_field(self):
        with pytest.raises(ConfigError, match=r"motor\.speed"):
            config_from_dict({"motor": {"speed": "fast"}})


class TestLogRoundTrip:
    def test_empty_trial_writes_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_log(path, [])
        assert path.read_text().strip() == (
            "t,wrist_angle,region,motor_position,true_force,measured_force,in_band,intent"
        )
        assert read_log(path) == []

    def test_real_trace_round_trips_bit_exactly(self, tmp_path):
        cfg = SessionConfig()
        harness = cfg.harness()
        targets = compute_targets(run_max_force(harness, Twa(), cfg.participant).highest_max)
        outcome = run_modulation_trial(harness, Twa(), cfg.participant, targets[1])
        path = tmp_path / "trace.csv"
        write_log(path, outcome.trace)
        assert tuple(read_log(path)) == outcome.trace

    def test_long_synthetic_trace_round_trips(self, tmp_path):
        rows = [
            TickLogRow(t=k * 0.01, wrist_angle=k * 0.123456789, region="neutral",
                       motor_position=k / 3000.0, true_force=k * 0.00314159,
                       measured_force=(k % 50) * 0.28, in_band=bool(k % 2), intent="script")
            for k in range(3000)
        ]
        path = tmp_path / "long.csv"
        write_log(path, rows)
        assert read_log(path) == rows

    def test_malformed_row_reports_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_log(path, [TickLogRow(0.0, 0.0, "neutral", 0.0, 0.0, 0.0, False, "x")])
        with path.open("a", newline="") as fh:
            fh.write("0.01,not_a_number,neutral,0,0,0,false,x\r\n")
        with pytest.raises(InvalidInputError, match="row 3"):
            read_log(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "hdr.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(InvalidInputError, match="header"):
            read_log(path)

    @given(st.floats(allow_nan=False, allow_infinity=False))
    @settings(max_examples=200)
    def test_format_float_round_trips_any_value(self, value):
        assert float(format_float(value)) == value


class TestCli:
    def test_maxforce_passive_matches_anchor(self, tmp_path, capsys):
        code = cli_main(["maxforce", "--mode", "passive", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "highest max: 10.36 N" in out
        assert (tmp_path / "maxforce_passive_trial1.csv").exists()

    def test_modulate_writes_summary_and_logs(self, tmp_path):
        code = cli_main(["modulate", "--mode", "passive", "--out", str(tmp_path)])
        assert code == 0
        summary = (tmp_path / "summary_passive.csv").read_text().splitlines()
        assert summary[0].startswith("mode,seed,average_max_force")
        assert len(summary) == 4  # header + one row per target
        assert (tmp_path / "modulate_passive_p20_r1.csv").exists()

    def test_compare_emits_one_row_per_mode_seed_target(self, tmp_path):
        code = cli_main(["compare", "--seeds", "1", "--out", str(tmp_path)])
        assert code == 0
        rows = (tmp_path / "summary.csv").read_text().splitlines()
        assert len(rows) == 1 + 4 * 1 * 3  # header + modes x seeds x targets

    def test_missing_config_exits_2(self, capsys):
        code = cli_main(["maxforce", "--config", "/nonexistent/cfg.json"])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_subcommand_exits_2(self, capsys):
        assert cli_main(["frobnicate"]) == 2

    def test_invalid_config_value_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"tick_rate": 0}))
        assert cli_main(["maxforce", "--config", str(path)]) == 2

    def test_calibrate_prints_solved_constants(self, capsys):
        assert cli_main(["calibrate"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["tenodesis_max_force"] == pytest.approx(10.5)
        assert payload["device_stiffness"] > 0

    def test_replay_reproduces_physics(self, tmp_path, capsys):
        assert cli_main(["maxforce", "--mode", "twa", "--out", str(tmp_path), "--trials", "1"]) == 0
        log = tmp_path / "maxforce_twa_trial1.csv"
        code = cli_main(["replay", "--mode", "twa", "--log", str(log)])
        out = capsys.readouterr().out
        assert code == 0
        assert "replay identical" in out

    def test_replay_detects_divergence(self, tmp_path, capsys):
        assert cli_main(["maxforce", "--mode", "twa", "--out", str(tmp_path), "--trials", "1"]) == 0
        log = tmp_path / "maxforce_twa_trial1.csv"
        # replaying a throttle trace under passive physics cannot match
        code = cli_main(["replay", "--mode", "passive", "--log", str(log)])
        assert code == 1
        assert "mismatch" in capsys.readouterr().out

    def test_env_var_overrides_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ORTHOSIS_SIM_OUT", str(tmp_path / "env_out"))
        assert cli_main(["maxforce", "--mode", "passive", "--trials", "1"]) == 0
        assert (tmp_path / "env_out" / "maxforce_passive_trial1.csv").exists()

    def test_grt_prints_total(self, tmp_path, capsys):
        code = cli_main(["grt", "--mode", "passive", "--out", str(tmp_path)])
        assert code == 0
        assert "total" in capsys.readouterr().out
        assert (tmp_path / "grt_passive.csv").exists()
