"""Command-line surface: subcommands, exit codes, emitted files."""

from __future__ import annotations

import json

import pytest

from gridstress.cli import cli_main
from gridstress.fileio import parse_branch_detail_csv, parse_report_csv


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    """Materialize the bundled fixture once for all CLI tests."""
    out = tmp_path_factory.mktemp("bench")
    code = cli_main(["benchmark", "--out", str(out)])
    assert code == 0
    return out


def _run_args(fixture_dir, scenario, *extra):
    return [
        "--network", str(fixture_dir / "network.json"),
        "--scenario", str(fixture_dir / "scenarios" / f"{scenario}.json"),
        "--profiles", str(fixture_dir / "profiles"),
        *extra,
    ]


class TestBenchmarkCommand:
    def test_writes_fixture_and_reports(self, fixture_dir):
        assert (fixture_dir / "network.json").is_file()
        assert sorted(p.name for p in (fixture_dir / "scenarios").glob("*.json")) == [
            "base.json", "ev10.json", "ev25.json", "ev25_pv.json", "ev25_pv_lm.json"]
        assert sorted(p.name for p in (fixture_dir / "profiles").glob("*.csv")) == [
            "campus_buildings.csv", "ev_workday.csv", "pv_clear_day.csv"]
        assert (fixture_dir / "report.csv").is_file()
        assert len(list((fixture_dir / "details").glob("*.csv"))) == 5

    def test_report_shows_expected_trend(self, fixture_dir):
        rows = dict(parse_report_csv((fixture_dir / "report.csv").read_text()))
        assert rows["base"].count_at_or_above_100() == 0
        assert rows["base"].bin_40_80 == 2
        assert (rows["ev10"].count_at_or_above_100()
                < rows["ev25"].count_at_or_above_100())
        assert (rows["ev25_pv"].count_at_or_above_100()
                < rows["ev25"].count_at_or_above_100())
        assert rows["ev25_pv_lm"].bin_100_150 == 0

    def test_output_is_reproducible(self, fixture_dir, tmp_path):
        again = tmp_path / "again"
        assert cli_main(["benchmark", "--out", str(again)]) == 0
        for name in ("network.json", "report.csv"):
            assert (again / name).read_bytes() == (fixture_dir / name).read_bytes()


class TestValidate:
    def test_fixture_validates(self, fixture_dir, capsys):
        assert cli_main(["validate", "--network", str(fixture_dir / "network.json")]) == 0
        assert "OK" in capsys.readouterr().out

    def test_broken_file_diagnostics(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"s_base_mva": 10.0}')
        assert cli_main(["validate", "--network", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "buses" in err

    def test_missing_file_is_diagnostic(self, tmp_path, capsys):
        assert cli_main(["validate", "--network", str(tmp_path / "nope.json")]) == 1
        assert "error" in capsys.readouterr().err.lower()


class TestSolve:
    def test_base_case_slot_36(self, fixture_dir, tmp_path, capsys):
        out = tmp_path / "solve"
        code = cli_main(["solve", *_run_args(fixture_dir, "base"),
                         "--interval", "36", "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "converged" in text
        detail = parse_branch_detail_csv(
            (out / "detail_base_slot36.csv").read_text())
        assert all(loading < 80.0 for _, loading, _ in detail.values())

    def test_interval_out_of_range_is_usage_error(self, fixture_dir, capsys):
        code = cli_main(["solve", *_run_args(fixture_dir, "base"),
                         "--interval", "96"])
        assert code == 1
        assert "interval" in capsys.readouterr().err

    def test_unknown_flag_rejected_with_usage(self, fixture_dir, capsys):
        code = cli_main(["solve", *_run_args(fixture_dir, "base"), "--warp", "9"])
        assert code == 1
        assert "usage" in capsys.readouterr().err

    def test_json_text_format(self, fixture_dir, tmp_path):
        out = tmp_path / "jsonrep"
        code = cli_main(["solve", *_run_args(fixture_dir, "ev10"),
                         "--out", str(out), "--format", "json-text"])
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["report"][0]["scenario"] == "ev10"


class TestSweep:
    def test_full_day_ev25(self, fixture_dir, tmp_path, capsys):
        out = tmp_path / "sweep"
        code = cli_main(["sweep", *_run_args(fixture_dir, "ev25"), "--out", str(out)])
        assert code in (0, 2)  # heavy overload may legitimately diverge
        status = (out / "sweep_ev25.csv").read_text().splitlines()
        assert status[0] == "interval,converged,iterations,max_loading_percent,branches_ge_100"
        assert len(status) == 97
        assert len(list((out / "details").glob("ev25_slot*.csv"))) == 96
        assert "96 intervals" in capsys.readouterr().out

    def test_stagger_sweep_reports_ledger(self, fixture_dir, capsys):
        code = cli_main(["sweep", *_run_args(fixture_dir, "ev25_pv_lm")])
        assert code in (0, 2)
        text = capsys.readouterr().out
        assert "EV energy" in text
        assert "unserved" in text


class TestReport:
    def test_rebins_stored_details(self, fixture_dir, tmp_path, capsys):
        detail = fixture_dir / "details" / "ev25_slot36.csv"
        out = tmp_path / "rebinned"
        code = cli_main(["report", str(detail), "--out", str(out)])
        assert code == 0
        rows = dict(parse_report_csv((out / "report.csv").read_text()))
        fixture_rows = dict(parse_report_csv((fixture_dir / "report.csv").read_text()))
        assert rows["ev25_slot36"].counts() == fixture_rows["ev25"].counts()

    def test_multiple_details_one_row_each(self, fixture_dir, capsys):
        details = sorted((fixture_dir / "details").glob("*.csv"))
        code = cli_main(["report", *[str(p) for p in details]])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("scenario,bin_40_80")
        assert len(out.strip().splitlines()) == 6
