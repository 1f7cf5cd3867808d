import csv
import json

import pytest

from northopt import ObjectiveWeights, VariableBounds, make_taskset, save_problem
from northopt.cli import main


def write_worked_instance(path):
    ts = make_taskset([1, 2, 3], [4, 6, 10])
    save_problem(path, ts, ObjectiveWeights.uniform(3), VariableBounds.defaults([1, 2, 3]))


def write_unschedulable(path):
    ts = make_taskset([3, 2], [4, 4])
    save_problem(path, ts, ObjectiveWeights.uniform(2),
                 VariableBounds(period_min=(3.0, 2.0), period_max=(4.0, 4.0)))


class TestAnalyzeCommand:
    def test_schedulable_output(self, tmp_path, capsys):
        path = tmp_path / "ts.json"
        write_worked_instance(path)
        code = main(["analyze", "--input", str(path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "schedulable: yes" in out
        assert "response times: 1 3 10" in out

    def test_simulate_flag(self, tmp_path, capsys):
        path = tmp_path / "ts.json"
        write_worked_instance(path)
        assert main(["analyze", "--input", str(path), "--simulate"]) == 0
        out = capsys.readouterr().out
        assert "simulated worst responses: 1 3 10" in out

    def test_unschedulable_exits_2(self, tmp_path, capsys):
        path = tmp_path / "ts.json"
        write_unschedulable(path)
        code = main(["analyze", "--input", str(path)])
        out = capsys.readouterr().out
        assert code == 2
        assert "schedulable: no" in out
        assert "deadline misses: 1" in out

    def test_missing_file_exits_1(self, tmp_path, capsys):
        code = main(["analyze", "--input", str(tmp_path / "nope.json")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_malformed_file_names_field(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"tasks": []}')
        code = main(["analyze", "--input", str(path)])
        assert code == 1
        assert "alpha" in capsys.readouterr().err


class TestOptimizeCommand:
    def test_writes_solution(self, tmp_path, capsys):
        ts_path = tmp_path / "ts.json"
        out_path = tmp_path / "sol.json"
        write_worked_instance(ts_path)
        code = main(["optimize", "--input", str(ts_path), "--method", "north+rm",
                     "--seed", "7", "--out", str(out_path)])
        assert code == 0
        data = json.loads(out_path.read_text())
        assert data["status"] in ("converged", "max_outer")
        assert data["seed"] == 7
        assert "status=" in capsys.readouterr().out

    def test_unknown_method_usage_error(self, tmp_path, capsys):
        ts_path = tmp_path / "ts.json"
        write_worked_instance(ts_path)
        code = main(["optimize", "--input", str(ts_path), "--method", "edf",
                     "--out", str(tmp_path / "s.json")])
        assert code == 1

    def test_infeasible_input_exits_2(self, tmp_path):
        ts_path = tmp_path / "ts.json"
        ts = make_taskset([3, 3], [3, 3])
        save_problem(ts_path, ts, ObjectiveWeights.uniform(2),
                     VariableBounds((3.0, 3.0), (3.0, 3.0)))
        code = main(["optimize", "--input", str(ts_path),
                     "--out", str(tmp_path / "s.json")])
        assert code == 2

    def test_dkc_method_runs(self, tmp_path):
        ts_path = tmp_path / "ts.json"
        write_worked_instance(ts_path)
        code = main(["optimize", "--input", str(ts_path), "--method", "north+dkc",
                     "--k", "2.0", "--out", str(tmp_path / "s.json")])
        assert code == 0


class TestGenerateCommand:
    def test_writes_n_files(self, tmp_path):
        out = tmp_path / "sets"
        code = main(["generate", "--n-tasks", "4", "--n-sets", "3",
                     "--seed", "1", "--out", str(out)])
        assert code == 0
        files = sorted(p.name for p in out.glob("*.json"))
        assert files == ["taskset_0000.json", "taskset_0001.json", "taskset_0002.json"]
        data = json.loads((out / "taskset_0000.json").read_text())
        assert len(data["tasks"]) == 4

    def test_generated_file_feeds_analyze(self, tmp_path, capsys):
        out = tmp_path / "sets"
        main(["generate", "--n-tasks", "4", "--seed", "1", "--out", str(out)])
        code = main(["analyze", "--input", str(out / "taskset_0000.json")])
        assert code == 0


class TestBenchmarkCommand:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        argv = ["benchmark", "--n-tasks", "4", "--n-sets", "3", "--seed", "2",
                "--workers", "1"]
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        rows1 = list(csv.reader((out1 / "results.csv").open()))
        rows2 = list(csv.reader((out2 / "results.csv").open()))
        header = rows1[0]
        t_cols = [header.index("t_north_ms"), header.index("t_plus_ms")]
        for a, b in zip(rows1, rows2):
            for i, (x, y) in enumerate(zip(a, b)):
                if i not in t_cols:
                    assert x == y
        summary = json.loads((out1 / "summary.json").read_text())
        assert summary["count"] == 3


class TestUsage:
    def test_no_command_exits_1(self, capsys):
        assert main([]) == 1

    def test_unknown_flag_exits_1(self, capsys):
        assert main(["analyze", "--input", "x.json", "--frobnicate"]) == 1

    def test_help_lists_defaults(self, capsys):
        assert main(["optimize", "--help"]) == 0
        out = capsys.readouterr().out
        assert "--method" in out and "north+rm" in out
        assert "--max-outer" in out and "50" in out

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert "northopt" in capsys.readouterr().out
