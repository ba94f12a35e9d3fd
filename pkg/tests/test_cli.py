import csv
import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from pottsfield import cli, verify

SCHEMAS = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def load_schema(name):
    return json.loads((SCHEMAS / name).read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestVerifyCommand:
    def test_default_battery_passes(self, tmp_path):
        out = tmp_path / "report.json"
        assert cli.main(["verify", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        jsonschema.validate(report, load_schema("verify_report.schema.json"))
        assert report["passed"]
        assert report["failed_checks"] == []

    def test_mutated_coefficient_fails_named_check(self, tmp_path, monkeypatch):
        # inject the wrong diffusion coefficient through the battery hook
        original = verify.run_battery
        monkeypatch.setattr(
            cli.verify, "run_battery", lambda seed=0: original(seed=seed, yy_coeff=1.0)
        )
        out = tmp_path / "report.json"
        assert cli.main(["verify", "--out", str(out)]) == 1
        report = json.loads(out.read_text())
        assert report["failed_checks"] == ["diffusion_identity"]


class TestEosCommand:
    def test_single_branch(self, tmp_path):
        out = tmp_path / "eos.csv"
        assert cli.main(["eos", "--x", "0", "--y", "0", "--t", "0.5", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 1
        assert rows[0]["is_equilibrium"] == "1"

    def test_supercritical_maxima(self, tmp_path):
        out = tmp_path / "eos.csv"
        assert cli.main(["eos", "--x", "0", "--y", "0", "--t", "2", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert sum(r["classification"] == "maximum" for r in rows) >= 2
        assert sum(r["is_equilibrium"] == "1" for r in rows) == 1

    def test_json_format(self, tmp_path):
        out = tmp_path / "eos.json"
        code = cli.main(
            ["eos", "--x", "0", "--y", "0", "--t", "0.5", "--format", "json", "--out", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data[0]["classification"] == "maximum"


class TestSweepCommand:
    def test_columns_and_rows(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = cli.main(
            ["sweep", "--y", "0", "--x-min", "-0.5", "--x-max", "0.5",
             "--x-samples", "11", "--t", "0.5", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 11
        assert set(rows[0]) == {"x", "y", "t", "branch_id", "m1", "m2", "F", "is_equilibrium"}


class TestCuspCommand:
    def test_loci_and_events(self, tmp_path):
        loci = tmp_path / "loci.csv"
        events = tmp_path / "events.json"
        code = cli.main(
            ["cusp", "--resolution", "40", "--out", str(loci), "--events-out", str(events)]
        )
        assert code == 0
        rows = read_csv(loci)
        assert {r["locus_id"] for r in rows} == {"I", "II", "III_plus", "III_minus"}
        # the m2 -> 1/2 line rows are asymptotes, annotated instead of mapped
        annotated = [r for r in rows if r["reason"]]
        assert annotated
        assert all(r["x"] == "" for r in annotated)
        data = json.loads(events.read_text())
        jsonschema.validate(data, load_schema("cusp_events.schema.json"))
        assert data[0]["kind"] == "creation" and data[0]["time"] == 1.0


class TestFiniteNCommand:
    def test_zero_point_zero_error(self, tmp_path):
        out = tmp_path / "conv.csv"
        code = cli.main(
            ["finite-n", "--x", "0", "--y", "0", "--t", "0", "--N", "10", "--N", "100",
             "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert all(float(r["abs_error"]) < 1e-12 for r in rows)

    def test_size_error_exit_code(self, tmp_path):
        code = cli.main(
            ["finite-n", "--x", "0", "--y", "0", "--t", "0", "--N", "0",
             "--out", str(tmp_path / "x.csv")]
        )
        assert code == 3


class TestMcCommand:
    def test_report_schema(self, tmp_path):
        out = tmp_path / "mc.json"
        code = cli.main(
            ["mc", "--x", "0.1", "--y", "-0.2", "--t", "0.5", "--N", "100",
             "--sweeps", "4000", "--burn-in", "400", "--out", str(out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        jsonschema.validate(report, load_schema("mc_report.schema.json"))
        assert report["pass"]


class TestConfigFile:
    def test_config_presets_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t": 0.5, "y": 0.0}))
        out = tmp_path / "eos.csv"
        code = cli.main(
            ["eos", "--config", str(cfg), "--x", "0", "--y", "0.1", "--out", str(out)]
        )
        assert code == 0
        # explicit --y wins over the config's y; t comes from the config
        rows = read_csv(out)
        assert len(rows) == 1

    def test_explicit_flag_wins(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"x": 0.0, "y": 0.0, "t": 2.0}))
        out_cfg = tmp_path / "a.csv"
        out_flag = tmp_path / "b.csv"
        assert cli.main(["eos", "--config", str(cfg), "--out", str(out_cfg)]) == 0
        assert (
            cli.main(["eos", "--config", str(cfg), "--t", "0.5", "--out", str(out_flag)]) == 0
        )
        assert len(read_csv(out_cfg)) > 1
        assert len(read_csv(out_flag)) == 1

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"frobnicate": 1}))
        assert cli.main(["eos", "--config", str(cfg), "--x", "0", "--y", "0", "--t", "1"]) == 3


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["eos", "--x", "0"])  # missing required flags
        assert exc.value.code == 2

    def test_missing_command_is_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2


class TestDeterminism:
    def test_eos_byte_identical(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            cli.main(["eos", "--x", "0.03", "--y", "-0.02", "--t", "1.31", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
