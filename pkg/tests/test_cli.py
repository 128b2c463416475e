import csv
import json
import subprocess
import sys

import pytest

from mucfc import model
from mucfc.cli import main
from mucfc.dynamics import TRACE_HEADER
from mucfc.experiments import RESULT_HEADER


def test_simulate_writes_trace_and_summary(tmp_path, capsys):
    trace, out = tmp_path / "t.csv", tmp_path / "s.json"
    rc = main(["simulate", "--uavs", "10", "--tasks", "5", "--seed", "7", "--trace", str(trace), "--out", str(out)])
    assert rc == 0
    rows = list(csv.reader(trace.open()))
    assert tuple(rows[0]) == TRACE_HEADER
    phis = [float(r[5]) for r in rows[1:] if r[4] == "1"]
    assert all(b > a for a, b in zip(phis, phis[1:]))
    summary = json.loads(out.read_text())
    assert summary["converged"] and len(summary["selection"]) == 10
    assert sum(c["utility"] for c in summary["coalitions"]) == pytest.approx(summary["total_utility"], abs=1e-9)
    assert "total_utility=" in capsys.readouterr().out


def test_simulate_replay_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for dest in (a, b):
        assert main(["simulate", "--uavs", "8", "--tasks", "4", "--order", "pareto", "--seed", "3",
                     "--trace", str(dest)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_then_simulate_from_file(tmp_path):
    scen = tmp_path / "scen.json"
    assert main(["generate", "--uavs", "6", "--tasks", "3", "--seed", "4", "--out", str(scen)]) == 0
    assert model.load_scenario(scen).n_uavs == 6
    assert main(["simulate", "--scenario", str(scen), "--order", "selfish"]) == 0


def test_experiment_grid_to_file(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["experiment", "--uavs-grid", "6", "--tasks-grid", "3", "--r-grid", "0.006",
               "--rounds", "2", "--seed", "1", "--out", str(out)])
    assert rc == 0
    rows = list(csv.reader(out.open()))
    assert tuple(rows[0]) == RESULT_HEADER and len(rows) == 4


@pytest.mark.parametrize("argv", [
    [],
    ["simulate", "--tasks", "3"],
    ["simulate", "--uavs", "2", "--tasks", "3"],
    ["simulate", "--uavs", "4", "--tasks", "2", "--order", "greedy"],
    ["experiment", "fig9"],
    ["experiment", "--uavs-grid", "4"],
    ["experiment", "--uavs-grid", "", "--tasks-grid", "2"],
    ["validate", "--trials", "0"],
])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        rc = main(argv)
        raise SystemExit(rc)
    assert exc.value.code == 1


def test_io_errors_exit_2(tmp_path):
    assert main(["simulate", "--scenario", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{\"tasks\": 1}")
    assert main(["simulate", "--scenario", str(bad)]) == 2
    assert main(["generate", "--uavs", "4", "--tasks", "2", "--out", str(tmp_path / "no" / "x.json")]) == 2


def test_validate_passes(capsys):
    assert main(["validate", "--suite", "shapley", "--trials", "500"]) == 0
    assert "shapley: 500/500 passed" in capsys.readouterr().out


def test_validate_detects_wrong_revenue_branch(monkeypatch, capsys):
    def shifted(task, cap):
        # (e - beta) numerator on the decaying branch: jumps from V to 0 at the threshold
        if cap <= 0 or cap >= task.max_capacity:
            return 0.0
        if cap <= task.threshold:
            return task.value / task.threshold * cap
        return task.value * (cap - task.threshold) / (task.threshold - task.max_capacity)

    monkeypatch.setattr(model, "revenue", shifted)
    assert main(["validate", "--suite", "revenue", "--trials", "50"]) == 3
    assert "FAIL revenue continuity" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mucfc", "validate", "--suite", "potential", "--trials", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "potential: 5/5 passed" in proc.stdout
