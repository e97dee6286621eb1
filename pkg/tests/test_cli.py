import csv
import json
import shutil
from pathlib import Path

import pytest

from planopt import bundled_scenario
from planopt.cli import main

MINI = Path(__file__).parent / "data" / "mini_control.yaml"


@pytest.fixture(scope="module")
def mini_file(tmp_path_factory):
    target = tmp_path_factory.mktemp("scenario") / "mini.yaml"
    shutil.copy(MINI, target)
    return target


@pytest.fixture(scope="module")
def mini_run(tmp_path_factory, mini_file):
    out = tmp_path_factory.mktemp("run")
    code = main(["run", str(mini_file), "--mode", "moo", "--iterations", "40",
                 "--seed", "11", "--out", str(out)])
    assert code == 0
    return out


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


class TestValidate:
    def test_bundled_files_pass(self, capsys):
        assert main(["validate", str(bundled_scenario("saa-highway"))]) == 0
        assert main(["validate", str(bundled_scenario("offshore-wind"))]) == 0
        assert "auto-sorted" in capsys.readouterr().out

    def test_cycle_fails_with_name(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text(
            MINI.read_text(encoding="utf-8").replace("predecessors: []",
                                                     "predecessors: [1]"),
            encoding="utf-8",
        )
        assert main(["validate", str(bad)]) == 1
        assert "itself" in capsys.readouterr().out

    def test_bad_weights_fail_naming_section(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text(
            MINI.read_text(encoding="utf-8").replace("cost: 0.3", "cost: 0.4"),
            encoding="utf-8",
        )
        assert main(["validate", str(bad)]) == 1
        assert "weights" in capsys.readouterr().out

    def test_parse_failure(self, tmp_path):
        bad = tmp_path / "broken.yaml"
        bad.write_text("meta: {schema: 1\n  no", encoding="utf-8")
        assert main(["validate", str(bad)]) == 1


class TestRun:
    def test_fixed_seed_reproduces_output_bytes(self, tmp_path, mini_file):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["run", str(mini_file), "--iterations", "1", "--seed", "7",
                         "--out", str(out)]) == 0
        assert (out_a / "records.csv").read_bytes() == (out_b / "records.csv").read_bytes()
        assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()

    def test_summary_structure(self, mini_run):
        summary = json.loads((mini_run / "summary.json").read_text(encoding="utf-8"))
        assert summary["run"]["iterations"] == 40
        assert summary["run"]["seed"] == 11
        assert summary["scenario"]["kind"] == "control"
        assert set(summary["percentiles"]) == {"duration", "cost", "nuisance"}
        assert "no_delay_iterations" in summary["run"]

    def test_soo_summary_echoes_penalty_terms(self, tmp_path, mini_file):
        out = tmp_path / "soo"
        assert main(["run", str(mini_file), "--mode", "soo:cost", "--iterations", "5",
                     "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["run"]["soo_penalties"] == [
            {"target_duration": 9.0, "rate_per_day": 1000.0}
        ]

    def test_unknown_mode_is_validation_error(self, tmp_path, mini_file):
        assert main(["run", str(mini_file), "--mode", "soo:profit",
                     "--out", str(tmp_path / "x")]) == 1

    def test_invalid_scenario_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("meta: {schema: 1, kind: control, name: x}", encoding="utf-8")
        assert main(["run", str(bad), "--out", str(tmp_path / "y")]) == 1

    def test_env_var_sets_default_output_dir(self, tmp_path, mini_file, monkeypatch):
        monkeypatch.setenv("PLANOPT_OUT", str(tmp_path / "env-out"))
        assert main(["run", str(mini_file), "--iterations", "1"]) == 0
        assert (tmp_path / "env-out" / "mini-control-moo" / "records.csv").exists()


class TestReport:
    def test_round_trip_percentiles_match_summary_exactly(self, mini_run):
        assert main(["report", str(mini_run / "records.csv"),
                     "--out", str(mini_run / "report")]) == 0
        summary = json.loads((mini_run / "summary.json").read_text(encoding="utf-8"))
        rows = read_csv(mini_run / "report" / "percentiles.csv")
        assert rows[0] == ["objective", "level", "value"]
        for objective, level, value in rows[1:]:
            assert summary["percentiles"][objective][level] == float(value)

    def test_variable_frequency_rows(self, mini_run):
        rows = read_csv(mini_run / "report" / "variable_frequency.csv")
        assert len(rows) == 2  # header + one binary measure
        assert rows[1][0] == "x1"

    def test_cdf_and_curve_tables_exist(self, mini_run):
        report = mini_run / "report"
        for objective in ("duration", "cost", "nuisance"):
            assert (report / f"cdf_{objective}.csv").exists()
            assert (report / f"curve_{objective}.csv").exists()
        markers = read_csv(report / "curve_markers.csv")
        assert markers[0] == ["objective", "level", "value", "preference"]

    def test_cdf_is_monotone(self, mini_run):
        rows = read_csv(mini_run / "report" / "cdf_duration.csv")[1:]
        values = [float(r[0]) for r in rows]
        probs = [float(r[1]) for r in rows]
        assert values == sorted(values)
        assert probs == sorted(probs)
        assert probs[-1] == 1.0

    def test_top_k_limits_combination_rows(self, mini_run):
        assert main(["report", str(mini_run / "records.csv"), "--top-k", "1",
                     "--out", str(mini_run / "report-k1")]) == 0
        rows = read_csv(mini_run / "report-k1" / "combinations.csv")
        assert len(rows) <= 2

    def test_single_record_input(self, tmp_path, mini_file):
        out = tmp_path / "single"
        assert main(["run", str(mini_file), "--iterations", "1",
                     "--out", str(out)]) == 0
        assert main(["report", str(out / "records.csv"),
                     "--out", str(out / "report")]) == 0
        rows = read_csv(out / "report" / "combinations.csv")
        assert len(rows) == 2
        assert float(rows[1][2]) == 1.0

    def test_malformed_records_is_runtime_error(self, tmp_path):
        bad = tmp_path / "records.csv"
        bad.write_text("iteration,nope\n1,2\n", encoding="utf-8")
        assert main(["report", str(bad)]) == 2

    def test_missing_records_is_runtime_error(self, tmp_path):
        assert main(["report", str(tmp_path / "absent.csv")]) == 2
