"""Config validation, runner report determinism and the click entry points."""

import csv
import json

import pytest
from click.testing import CliRunner

from recurlab import runner
from recurlab.cli import main
from recurlab.config import (
    config_from_dict,
    config_hash,
    load_config,
)
from recurlab.errors import ConfigValidationError

CONTRADICTION_RAW = {
    "schema_version": 1,
    "name": "contradiction-probe",
    "space": {"domain": "line", "grid_points": 800, "mode": "lp",
              "p": 1.0, "trunc": 10.0},
    "weight": {"name": "flat"},
    "family": {"kind": "translation"},
    "analysis": {"run": ["admissibility", "criterion", "detector",
                         "cross-validate"],
                 "horizon": 16, "detector_tol": 5.0},
}


def _instance_raw(name="diagonal-rational", **analysis):
    raw = {"schema_version": 1, "instance": name}
    if analysis:
        raw["analysis"] = analysis
    return raw


class TestValidation:
    """Every malformed field is reported with its path in one pass."""

    @pytest.mark.parametrize("patch, expected", [
        ({"space": {"domain": None, "grid_points": 64, "mode": "lp",
                    "p": 1.0, "trunc": 4.0}},
         "space.domain: expected one of ('halfline', 'line', 'openbox'), "
         "got None"),
        ({"space": {"domain": "halfline", "grid_points": 64, "mode": "lp",
                    "p": 0.5, "trunc": 4.0}},
         "space.p: need p >= 1, got 0.5"),
        ({"weight": {"name": "nosuch"}},
         "weight.name: unknown weight 'nosuch'"),
        ({"analysis": {"bogus": 1}},
         "analysis.bogus: unknown field"),
        ({"family": {"kind": "translation",
                     "frequencies": [1.0, 2.0]}},
         "family.frequencies: only valid for diagonal families"),
    ])
    def test_single_problem_strings(self, patch, expected):
        raw = {"schema_version": 1, "name": "t",
               "space": {"domain": "halfline", "grid_points": 64,
                         "mode": "lp", "p": 1.0, "trunc": 4.0},
               "weight": {"name": "expdecay"},
               "family": {"kind": "translation"}}
        raw.update(patch)
        with pytest.raises(ConfigValidationError) as err:
            config_from_dict(raw)
        assert expected in err.value.problems

    def test_all_problems_collected_at_once(self):
        raw = {"schema_version": 1, "name": "t",
               "space": {"domain": "nowhere", "grid_points": -3,
                         "mode": "lp", "p": 0.5, "trunc": 4.0},
               "weight": {"name": "nosuch"},
               "family": {"kind": "translation"},
               "analysis": {"bogus": 1}}
        with pytest.raises(ConfigValidationError) as err:
            config_from_dict(raw)
        joined = "\n".join(err.value.problems)
        for fragment in ("space.domain", "space.grid_points",
                         "space.p", "weight.name", "analysis.bogus"):
            assert fragment in joined
        assert len(err.value.problems) >= 5

    def test_matrix_cap_applies_only_when_requested(self):
        raw = {"schema_version": 1, "name": "big",
               "space": {"domain": "halfline", "grid_points": 8192,
                         "mode": "lp", "p": 1.0, "trunc": 50.0},
               "weight": {"name": "expdecay"},
               "family": {"kind": "translation"},
               "analysis": {"run": ["admissibility", "spectrum"]}}
        with pytest.raises(ConfigValidationError) as err:
            config_from_dict(raw)
        assert ("space.grid_points: 8192 exceeds the 4096 cap for matrix "
                "analyses" in err.value.problems)
        # without a matrix analysis the same grid is fine
        raw["analysis"] = {"run": ["admissibility"]}
        cfg = config_from_dict(raw)
        assert cfg.space.grid_points == 8192

    def test_instance_conflicts_with_custom_blocks(self):
        raw = _instance_raw()
        raw["space"] = {"domain": "halfline", "grid_points": 64,
                       "mode": "lp", "p": 1.0, "trunc": 4.0}
        raw["weight"] = {"name": "expdecay"}
        raw["family"] = {"kind": "translation"}
        with pytest.raises(ConfigValidationError) as err:
            config_from_dict(raw)
        assert ("instance: cannot combine with a custom space/weight/family "
                "block" in err.value.problems)

    def test_unknown_instance(self):
        with pytest.raises(ConfigValidationError) as err:
            config_from_dict(_instance_raw("nosuch"))
        assert "instance: unknown catalog instance 'nosuch'" \
            in err.value.problems

    def test_custom_config_requires_all_three_blocks(self):
        raw = {"schema_version": 1, "name": "partial",
               "weight": {"name": "expdecay"}}
        with pytest.raises(ConfigValidationError) as err:
            config_from_dict(raw)
        assert "space: required without an instance" in err.value.problems
        assert "family: required without an instance" in err.value.problems


def test_config_hash_ignores_key_order():
    a = {"schema_version": 1, "instance": "halfline-flat", "x": [1, 2]}
    b = {"x": [1, 2], "instance": "halfline-flat", "schema_version": 1}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "instance": "halfline-expdecay"})


def test_digest_is_hash_of_raw_dict():
    raw = _instance_raw()
    cfg = config_from_dict(raw)
    assert cfg.digest == config_hash(raw)


def test_load_config_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigValidationError):
        load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigValidationError):
        load_config(bad)


class TestRunner:

    def test_contradiction_sets_exit_code_two(self):
        """An absurd detector tolerance turns every time into a witness.

        The line-translation criterion correctly says the flat weight is
        not recurrent, so the consistency pass must flag the detector run
        and the record must carry exit code 2.
        """
        record = runner.run(config_from_dict(CONTRADICTION_RAW))
        assert record.exit_code == 2
        result = record.results[0]
        assert result.consistency.tag == "CriterionNoDetectorYes"
        assert result.criterion.holds is False
        assert result.detector.verdict.value == "WitnessFound"

    def test_reports_are_byte_identical_across_reruns(self, tmp_path):
        cfg = config_from_dict(CONTRADICTION_RAW)
        first = tmp_path / "a"
        second = tmp_path / "b"
        first.mkdir()
        second.mkdir()
        runner.write_reports(runner.run(cfg), first)
        runner.write_reports(runner.run(cfg), second)
        for name in ("summary.json", "rows.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_csv_rows_schema_and_sorting(self, tmp_path):
        cfg = config_from_dict(CONTRADICTION_RAW)
        record = runner.run(cfg)
        runner.write_reports(record, tmp_path)
        with open(tmp_path / "rows.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == list(runner.CSV_COLUMNS)
        body = rows[1:]
        assert all(len(row) == len(runner.CSV_COLUMNS) for row in body)
        truncated = {row[7] for row in body}
        assert truncated <= {"true", "false", ""}
        keys = [(row[0], row[1]) for row in body]
        assert keys == sorted(keys)

    def test_summary_has_no_wall_time(self, tmp_path):
        """Timing varies run to run, so it must stay out of the artifacts."""
        record = runner.run(config_from_dict(CONTRADICTION_RAW))
        runner.write_reports(record, tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert "wall_time" not in summary
        assert summary["config_hash"] == record.config_hash
        assert summary["exit_code"] == 2


class TestCli:

    def setup_method(self):
        self.runner = CliRunner()

    def test_catalog_lists_all_instances(self):
        out = self.runner.invoke(main, ["catalog"])
        assert out.exit_code == 0
        from recurlab.catalog import INSTANCE_NAMES
        for name in INSTANCE_NAMES:
            assert name in out.output

    def test_check_admissible_stock_instance(self):
        out = self.runner.invoke(
            main, ["check-admissible", "--instance", "halfline-expdecay"])
        assert out.exit_code == 0
        assert "weight: holds" in out.output

    def test_analyze_unknown_instance_exits_one(self):
        out = self.runner.invoke(main, ["analyze", "--instance", "nosuch"])
        assert out.exit_code == 1
        assert "unknown catalog instance" in out.output

    def test_analyze_config_and_instance_are_exclusive(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(_instance_raw()))
        out = self.runner.invoke(
            main, ["analyze", "--config", str(path),
                   "--instance", "halfline-flat"])
        assert out.exit_code == 1
        assert "mutually exclusive" in out.output

    def test_analyze_contradiction_config_exits_two(self, tmp_path):
        path = tmp_path / "contra.json"
        path.write_text(json.dumps(CONTRADICTION_RAW))
        out = self.runner.invoke(main, ["analyze", "--config", str(path)])
        assert out.exit_code == 2
        assert "criterion/detector contradiction" in out.output

    def test_analyze_writes_reports(self, tmp_path):
        out = self.runner.invoke(
            main, ["analyze", "--instance", "diagonal-rational",
                   "--out", str(tmp_path)])
        assert out.exit_code == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["exit_code"] == 0
        assert "diagonal-rational" in summary["instances"]
        assert (tmp_path / "rows.csv").exists()
        assert "consistency Agree" in out.output

    def test_construct_stall_is_reported_not_crashed(self):
        out = self.runner.invoke(
            main, ["construct-recurrent", "--instance", "halfline-flat",
                   "--stages", "2"])
        assert out.exit_code == 0
        assert "construction stalled" in out.output
        assert "completed stages: 0" in out.output

    def test_spectrum_refuses_grid_beyond_cap(self):
        out = self.runner.invoke(
            main, ["spectrum", "--instance", "halfline-growing",
                   "--grid-points", "8192"])
        assert out.exit_code == 1
        assert "exceeds the dense assembly cap" in out.output

    def test_verify_theorems_empty_selection_is_noop(self):
        out = self.runner.invoke(main, ["verify-theorems", "--suite", ""])
        assert out.exit_code == 0
        assert "no suites selected" in out.output

    def test_verify_theorems_unknown_suite(self):
        out = self.runner.invoke(
            main, ["verify-theorems", "--suite", "nosuch"])
        assert out.exit_code == 1
        assert "unknown suites" in out.output

    def test_verify_theorems_tamper_fails_honestly(self):
        out = self.runner.invoke(
            main, ["verify-theorems", "--suite", "rotation",
                   "--tamper", "rotation"])
        assert out.exit_code == 1
        assert "FAIL rotation" in out.output
