from __future__ import annotations

import csv
import json
import os
import subprocess
import sys

import pytest

from blockplace import benchmarks, default_hw, parse_program, problem_to_json, simulate
from blockplace.cli import (
    EXIT_HW,
    EXIT_IO,
    EXIT_PARSE,
    EXIT_SIM,
    EXIT_USAGE,
    cmd_pipeline,
    run,
)
from blockplace.solver import placement_from_json


@pytest.fixture
def files(tmp_path):
    """Copies of the bundled inputs inside a scratch directory."""
    for name in ("sum5", "loop3", "fir"):
        (tmp_path / f"{name}.cfgir").write_text(benchmarks.source(name))
    (tmp_path / "loop3.json").write_text(problem_to_json(benchmarks.load_problem("loop3")))
    return tmp_path


def _run(files, *argv):
    return run([a.format(d=files) for a in argv])


class TestOptimize:
    def test_sum5(self, files):
        res = _run(files, "optimize", "-i", "{d}/sum5.cfgir", "--ram", "64", "--xlimit", "1.5", "-o", "{d}/out")
        assert res.exit_code == 0
        assert {k for _, k in res.files} == {"placement.json", "report.txt"}
        doc = json.loads((files / "out" / "placement.json").read_text())
        assert "loop" in doc["in_ram"]
        report = (files / "out" / "report.txt").read_text()
        assert "model units" in report
        for line in ("energy", "cycles", "avg power"):
            assert any(l.strip().startswith(line) and "%" in l for l in report.splitlines())

    def test_problem_json_input(self, files):
        res = _run(files, "optimize", "-i", "{d}/loop3.json", "--ram", "20", "-o", "{d}")
        assert res.exit_code == 0
        doc = json.loads((files / "placement.json").read_text())
        assert doc["in_ram"] == ["loop", "exit"] and doc["energy"] == 358

    def test_profile_frequencies(self, files, capsys):
        assert _run(files, "simulate", "-i", "{d}/sum5.cfgir", "--profile-out", "{d}/prof.json").exit_code == 0
        res = _run(files, "optimize", "-i", "{d}/sum5.cfgir", "--freq", "profile:{d}/prof.json", "-o", "{d}")
        assert res.exit_code == 0
        assert "profile:" in (files / "report.txt").read_text()

    def test_percentage_budget(self, files):
        res = _run(files, "optimize", "-i", "{d}/fir.cfgir", "--ram", "25%", "--xlimit", "1.33", "-o", "{d}")
        assert res.exit_code == 0
        doc = json.loads((files / "placement.json").read_text())
        assert doc["time_factor"] <= 1.33 and doc["in_ram"]

    def test_missing_input_writes_nothing(self, files):
        res = _run(files, "optimize", "-i", "{d}/missing.cfgir", "-o", "{d}/out")
        assert res.exit_code == EXIT_IO
        assert res.files == []
        assert not (files / "out").exists()

    def test_deterministic(self, files):
        argv = ("optimize", "-i", "{d}/fir.cfgir", "--ram", "40", "-o")
        _run(files, *argv, "{d}/a")
        _run(files, *argv, "{d}/b")
        for name in ("placement.json", "report.txt"):
            assert (files / "a" / name).read_bytes() == (files / "b" / name).read_bytes()


class TestErrors:
    def test_parse_error(self, files, capsys):
        (files / "bad.cfgir").write_text("func main { block a { br nowhere } }")
        res = _run(files, "optimize", "-i", "{d}/bad.cfgir", "-o", "{d}/out")
        assert res.exit_code == EXIT_PARSE
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1 and "nowhere" in err[0]
        assert not (files / "out").exists()

    def test_hw_error(self, files):
        (files / "hw.json").write_text('{"instr_table": {"ret": [4, 1]}}')
        res = _run(files, "optimize", "-i", "{d}/sum5.cfgir", "--hw", "{d}/hw.json")
        assert res.exit_code == EXIT_HW

    def test_sim_error(self, files):
        (files / "spin.cfgir").write_text("func main { block a { br a } block b { ret } }")
        assert _run(files, "simulate", "-i", "{d}/spin.cfgir", "--max-steps", "50").exit_code == EXIT_SIM

    def test_usage(self):
        assert run(["bogus"]).exit_code == EXIT_USAGE
        assert run(["optimize"]).exit_code == EXIT_USAGE

    def test_distinct_codes(self):
        from blockplace import cli

        codes = [v for k, v in vars(cli).items() if k.startswith("EXIT_")]
        assert len(codes) == len(set(codes))

    def test_help_lists_subcommands(self, capsys):
        assert run(["--help"]).exit_code == 0
        out = capsys.readouterr().out
        for cmd in ("optimize", "transform", "simulate", "enumerate", "sweep", "case-study", "export-lp", "full"):
            assert cmd in out


class TestOtherCommands:
    def test_transform_round_trip(self, files):
        _run(files, "optimize", "-i", "{d}/sum5.cfgir", "--ram", "64", "-o", "{d}")
        res = _run(files, "transform", "-i", "{d}/sum5.cfgir", "--placement", "{d}/placement.json", "-o", "{d}")
        assert res.exit_code == 0
        out = parse_program((files / "transformed.cfgir").read_text())
        assert simulate(out, default_hw()).trace == (15,)

    def test_simulate_outputs(self, files, capsys):
        res = _run(files, "simulate", "-i", "{d}/sum5.cfgir", "--trace-out", "{d}/t.txt", "--profile-out", "{d}/p.json")
        assert res.exit_code == 0
        assert (files / "t.txt").read_text() == "15\n"
        assert json.loads((files / "p.json").read_text()) == {"entry": 1, "loop": 5, "exit": 1}
        assert "cycles: flash=30 ram=0 total=30" in capsys.readouterr().out

    def test_enumerate(self, files):
        assert _run(files, "enumerate", "-i", "{d}/loop3.json", "--ram", "20", "-o", "{d}").exit_code == 0
        rows = list(csv.DictReader((files / "space.csv").open()))
        assert len(rows) == 8

    def test_sweep(self, files):
        res = _run(files, "sweep", "-i", "{d}/loop3.json", "--which", "time", "--values", "1.0,1.1,2.0", "--ram", "28", "-o", "{d}")
        assert res.exit_code == 0
        rows = list(csv.DictReader((files / "sweep.csv").open()))
        assert [r["energy"] for r in rows] == ["608", "607", "354"]

    def test_export_lp(self, files):
        assert _run(files, "export-lp", "-i", "{d}/loop3.json", "-o", "{d}").exit_code == 0
        text = (files / "model.lp").read_text()
        assert "- 250 r_loop" in text and text.rstrip().endswith("End")

    def test_case_study_saved(self, capsys):
        argv = ["case-study", "--e0", "16.9e-3", "--ta", "1.18", "--ps", "3.5e-3", "--ke", "0.825", "--kt", "1.33", "--saved"]
        res = run(argv)
        assert res.exit_code == 0 and res.files == []
        assert capsys.readouterr().out.strip() == "4.32e-3"

    def test_case_study_csv(self, tmp_path):
        params = tmp_path / "p.json"
        params.write_text('{"e0": 0.0169, "t_a": 1.18, "p_s": 0.0035, "k_e": 0.825, "k_t": 1.33}')
        res = run(["case-study", "--params", str(params), "--multiples", "4", "-o", str(tmp_path)])
        assert res.exit_code == 0
        rows = list(csv.reader((tmp_path / "case.csv").open()))
        assert rows[0] == ["T", "ratio", "saved_joules", "extension"]
        assert rows[1][1] == "infeasible"  # T = t_a is shorter than the stretched region
        assert len(rows) == 5

    def test_case_study_missing_params(self):
        assert run(["case-study", "--e0", "1"]).exit_code == EXIT_USAGE


class TestFull:
    def test_sum5(self, files):
        res = _run(files, "full", "-i", "{d}/sum5.cfgir", "--ram", "64", "-o", "{d}")
        assert res.exit_code == 0
        report = (files / "report.txt").read_text()
        assert "static estimate" in report and "profiled frequencies" in report
        assert "traces equal: yes" in report
        for name in ("placement.static.json", "placement.profile.json"):
            placement_from_json((files / name).read_text())

    def test_no_ram_gives_zero_deltas(self, files):
        res = cmd_pipeline(["-i", str(files / "loop3.cfgir"), "--ram", "0", "-o", str(files)])
        assert res.exit_code == 0
        report = (files / "report.txt").read_text()
        assert report.count("blocks in RAM: (none)") == 2
        deltas = [l for l in report.splitlines() if l.strip().startswith(("energy", "cycles", "avg power")) and "%" in l]
        assert deltas and all("+0.00 %" in l for l in deltas)

    def test_loop_free_program(self, files):
        (files / "flat.cfgir").write_text("func main { block a { li r0, 3 ; out r0 } block b { out r0 ; ret } }")
        assert _run(files, "full", "-i", "{d}/flat.cfgir", "--ram", "8", "-o", "{d}").exit_code == 0


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "blockplace.cli", "case-study", "--e0", "2", "--ta", "1", "--ps", "0",
         "--ke", "0.5", "--kt", "1", "--saved"],
        capture_output=True, text=True, cwd=tmp_path, env={**os.environ},
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1.00e0"
