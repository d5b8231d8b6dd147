"""Command line interface, exercised in process through main(argv)."""

import json

import pytest

from mapf_lab.cli import main

from helpers import grid_from


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def stdout_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert out, f"no stdout (stderr: {err!r})"
    return code, json.loads(out), err


def write_map_file(tmp_path, rows, name="custom"):
    path = tmp_path / f"{name}.map"
    path.write_text(grid_from(rows).to_text())
    return str(path)


# ------------------------------------------------------------------- solve

def test_solve_prints_result_without_paths(capsys, data_dir):
    code, doc, err = stdout_json(
        capsys, "solve", "--map", f"{data_dir}/empty-8-8.map",
        "--agents", "4", "--seed", "3")
    assert code == 0
    assert doc["outcome"] == "solved"
    assert doc["strategy"] == "cbs"
    assert isinstance(doc["cost"], int)
    assert "paths" not in doc  # full paths go to --out, stdout stays compact


def test_solve_writes_full_plan(capsys, data_dir, tmp_path):
    plan_path = tmp_path / "plan.json"
    code, doc, _ = stdout_json(
        capsys, "solve", "--map", f"{data_dir}/empty-8-8.map",
        "--agents", "3", "--strategy", "cbswp", "--out", str(plan_path))
    assert code == 0
    assert doc["strategy"] == "cbswp"
    stored = json.loads(plan_path.read_text())
    assert stored["map"] == "empty-8-8"
    assert stored["resolution"] == 1
    assert stored["agents"] == 3
    assert len(stored["paths"]) == 3
    assert stored["cost"] == doc["cost"]


def test_solve_uses_scen_file_order(capsys, data_dir):
    code, doc, _ = stdout_json(
        capsys, "solve", "--map", f"{data_dir}/empty-8-8.map",
        "--scen", f"{data_dir}/empty-8-8.scen", "--agents", "2")
    assert code == 0
    assert doc["outcome"] == "solved"


def test_solve_failure_exits_one(capsys, tmp_path):
    path = write_map_file(tmp_path, ["..."], name="swap")
    scen = tmp_path / "swap.scen"
    scen.write_text("version 1\n"
                    "0\tswap\t3\t1\t0\t0\t2\t0\t0\n"
                    "0\tswap\t3\t1\t2\t0\t0\t0\t0\n")
    code, doc, err = stdout_json(
        capsys, "solve", "--map", path, "--scen", str(scen), "--agents", "2")
    assert code == 1
    assert doc["outcome"] == "infeasible"


def test_solve_usage_errors_exit_two(capsys, data_dir, tmp_path):
    cases = [
        ("solve", "--map", f"{data_dir}/nope.map", "--agents", "2"),
        ("solve", "--map", f"{data_dir}/empty-8-8.map", "--agents", "0"),
        ("solve", "--map", f"{data_dir}/empty-8-8.map", "--agents", "9999"),
        ("solve", "--map", f"{data_dir}/empty-8-8.map"),  # missing --agents
        ("solve", "--map", f"{data_dir}/empty-8-8.map", "--agents", "2",
         "--strategy", "astar"),
    ]
    for argv in cases:
        code, out, err = run(capsys, *argv)
        assert code == 2, argv
        assert err, argv
    bad_map = tmp_path / "bad.map"
    bad_map.write_text("type hex\nheight 1\nwidth 1\nmap\n.\n")
    code, _, err = run(capsys, "solve", "--map", str(bad_map), "--agents", "1")
    assert code == 2 and "bad.map" in err


# ------------------------------------------------------------------- bench

def test_bench_runs_and_aggregates(capsys, data_dir, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"maps = {data_dir}/empty-8-8.map:empty\n"
                   "resolutions = 1\n"
                   "scenario_count = 1\n"
                   "agent_base = 2\n"
                   "agent_increment = 2\n"
                   "max_agents = 4\n"
                   "strategies = cbs,cbswp\n"
                   "time_limit = 10\n")
    out_dir = tmp_path / "run"
    code, doc, err = stdout_json(capsys, "bench", str(cfg),
                                 "--out", str(out_dir))
    assert code == 0
    assert doc["records"] > 0
    assert doc["out_dir"] == str(out_dir)
    assert set(doc["outcomes"]) <= {"solved", "infeasible", "timeout",
                                    "exhausted"}
    assert (out_dir / "records-empty-8-8.csv").exists()
    assert doc["aggregate"] == str(out_dir / "aggregate.json")
    stored = json.loads((out_dir / "aggregate.json").read_text())
    assert set(stored) == {"success_rate", "runtime_instances", "cost_ratios"}
    assert stored["success_rate"]
    # Per-attempt progress lines go to stderr, one per record.
    assert len([ln for ln in err.splitlines() if "empty-8-8" in ln]) \
        == doc["records"]


def test_bench_usage_errors_exit_two(capsys, tmp_path, data_dir):
    code, _, err = run(capsys, "bench", str(tmp_path / "missing.cfg"),
                       "--out", str(tmp_path / "r1"))
    assert code == 2 and "missing.cfg" in err

    empty_maps = tmp_path / "empty.json"
    empty_maps.write_text('{"maps": []}')
    code, _, err = run(capsys, "bench", str(empty_maps),
                       "--out", str(tmp_path / "r2"))
    assert code == 2

    ghost = tmp_path / "ghost.cfg"
    ghost.write_text("maps = nowhere.map:g\n")
    code, _, err = run(capsys, "bench", str(ghost),
                       "--out", str(tmp_path / "r3"))
    assert code == 2 and "nowhere.map" in err


def test_bench_flag_overrides_reach_the_run(capsys, data_dir, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"maps = {data_dir}/empty-8-8.map:empty\n"
                   "resolutions = 1\n"
                   "scenario_count = 1\n"
                   "agent_base = 2\n"
                   "max_agents = 2\n"
                   "strategies = cbs\n"
                   "seed = 1\n")
    first = stdout_json(capsys, "bench", str(cfg),
                        "--out", str(tmp_path / "a"))[1]
    shifted = stdout_json(capsys, "bench", str(cfg),
                          "--out", str(tmp_path / "b"), "--seed", "2")[1]
    assert first["records"] == shifted["records"] == 1
    stored = json.loads((tmp_path / "a" / "aggregate.json").read_text())
    assert stored["cost_ratios"] == []  # single strategy, no pairs


# ---------------------------------------------------------------- topology

def test_topology_labels_and_heatmap(capsys, data_dir, tmp_path):
    code, doc, _ = stdout_json(
        capsys, "topology", "--map", f"{data_dir}/empty-16-16.map")
    assert code == 0
    assert doc["label"] == "large_open"
    assert doc["map"] == "empty-16-16"
    assert doc["resolution"] == 1
    assert 0.0 <= doc["evidence"]["raw_cv_sq"] < 0.5

    heat = tmp_path / "heat.csv"
    code, doc, _ = stdout_json(
        capsys, "topology", "--map", f"{data_dir}/maze-32-32-2.map",
        "--out", str(heat))
    assert code == 0
    assert doc["label"] == "narrow_dominated"
    lines = heat.read_text().splitlines()
    assert lines[0] == "x,y,bc"
    assert len(lines) - 1 == doc["heatmap_rows"]


def test_topology_sampling_flags(capsys, data_dir):
    code, doc, _ = stdout_json(
        capsys, "topology", "--map", f"{data_dir}/empty-16-16.map",
        "--sample", "64", "--seed", "11")
    assert code == 0
    assert doc["label"] == "large_open"
    code, _, err = run(capsys, "topology",
                       "--map", f"{data_dir}/empty-16-16.map",
                       "--sample", "100000")
    assert code == 2 and "sample" in err


def test_topology_threshold_overrides(capsys, data_dir, tmp_path):
    code, doc, _ = stdout_json(
        capsys, "topology", "--map", f"{data_dir}/empty-16-16.map",
        "--set", "empty_cv_threshold=0.0")
    assert code == 0
    assert doc["label"] != "large_open"

    thresholds = tmp_path / "thresholds.json"
    thresholds.write_text('{"empty_cv_threshold": 0.9}')
    code, doc, _ = stdout_json(
        capsys, "topology", "--map", f"{data_dir}/random-32-32-10.map",
        "--thresholds", str(thresholds))
    assert code == 0
    assert doc["label"] == "large_open"  # loosened bound flips the label

    for bogus in ("not_a_knob=1", "empty_cv_threshold=warm"):
        code, _, err = run(capsys, "topology",
                           "--map", f"{data_dir}/empty-16-16.map",
                           "--set", bogus)
        assert code == 2 and err


# ---------------------------------------------------------------- validate

def solve_to_file(capsys, data_dir, tmp_path, agents=3):
    plan_path = tmp_path / "plan.json"
    code, _, _ = run(capsys, "solve", "--map", f"{data_dir}/empty-8-8.map",
                     "--agents", str(agents), "--out", str(plan_path))
    assert code == 0
    return plan_path


def test_validate_accepts_solver_output(capsys, data_dir, tmp_path):
    plan_path = solve_to_file(capsys, data_dir, tmp_path)
    code, doc, _ = stdout_json(
        capsys, "validate", "--map", f"{data_dir}/empty-8-8.map",
        str(plan_path))
    assert code == 0
    assert doc["conflict_count"] == 0
    assert doc["conflicts"] == []


def test_validate_reports_conflicts(capsys, tmp_path):
    map_path = write_map_file(tmp_path, ["..."], name="lane")
    plan = tmp_path / "collide.json"
    plan.write_text(json.dumps({
        "paths": [{"agent": 0, "states": [0, 1]},
                  {"agent": 1, "states": [1, 0]}],
    }))
    code, doc, _ = stdout_json(capsys, "validate", "--map", map_path,
                               str(plan))
    assert code == 1
    assert doc["conflict_count"] == 1
    [conflict] = doc["conflicts"]
    assert conflict["kind"] == "edge"
    assert conflict["timestep"] == 0


def test_validate_usage_errors(capsys, tmp_path, data_dir):
    missing = tmp_path / "none.json"
    code, _, err = run(capsys, "validate",
                       "--map", f"{data_dir}/empty-8-8.map", str(missing))
    assert code == 2

    garbled = tmp_path / "garbled.json"
    garbled.write_text("{]")
    code, _, _ = run(capsys, "validate",
                     "--map", f"{data_dir}/empty-8-8.map", str(garbled))
    assert code == 2

    for payload in ({"paths": "zap"},
                    {"paths": [{"agent": 0, "states": []}]},
                    {"paths": [{"agent": 0, "states": [0, "x"]}]},
                    {}):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(payload))
        code, _, err = run(capsys, "validate",
                           "--map", f"{data_dir}/empty-8-8.map", str(bad))
        assert code == 2, payload

    teleport = tmp_path / "teleport.json"
    teleport.write_text(json.dumps(
        {"paths": [{"agent": 0, "states": [0, 63]}]}))
    code, _, err = run(capsys, "validate",
                       "--map", f"{data_dir}/empty-8-8.map", str(teleport))
    assert code == 2 and err


# ----------------------------------------------------------------- roadmap

def test_roadmap_emits_counts(capsys, data_dir, tmp_path):
    code, doc, _ = stdout_json(
        capsys, "roadmap", "--map", f"{data_dir}/empty-8-8.map",
        "--resolution", "2")
    assert code == 0
    assert len(doc["vertices"]) == 225
    assert doc["resolution"] == 2
    assert doc["width"] == doc["height"] == 8
    assert all(len(edge) == 2 for edge in doc["edges"])

    out = tmp_path / "rm.json"
    code, stdout, _ = run(
        capsys, "roadmap", "--map", f"{data_dir}/empty-8-8.map",
        "--out", str(out))
    assert code == 0
    stored = json.loads(out.read_text())
    assert len(stored["vertices"]) == 64


def test_roadmap_rejects_bad_width(capsys, data_dir):
    code, _, err = run(capsys, "roadmap",
                       "--map", f"{data_dir}/empty-8-8.map",
                       "--robot-width", "3.0")
    assert code == 2 and err


# ------------------------------------------------------------------ parser

def test_help_and_parse_errors(capsys):
    with_help = main(["--help"])
    captured = capsys.readouterr()
    assert with_help == 0
    assert "solve" in captured.out and "bench" in captured.out

    assert main([]) == 2
    capsys.readouterr()
    assert main(["conquer"]) == 2
    capsys.readouterr()
    assert main(["solve", "--frobnicate"]) == 2
    capsys.readouterr()
