"""Command-line contract: artifacts, stdout documents, exit codes."""

import json

import numpy as np
import pytest

import aoiplan
from aoiplan import load_agent, load_autoencoder, load_scenario, lower_bound, save_scenario
from aoiplan.cli import main
from conftest import build_scenario


def save(tmp_path, scenario, name="scenario.yaml"):
    path = tmp_path / name
    save_scenario(scenario, path)
    return str(path)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def test_generate_writes_loadable_scenario(tmp_path, capsys):
    out = tmp_path / "gen.yaml"
    assert main(["generate", "--nodes", "3", "--seed", "11", "--out", str(out)]) == 0
    assert "gen.yaml" in capsys.readouterr().out
    scenario = load_scenario(out)
    assert scenario.num_nodes == 3
    twin = tmp_path / "twin.yaml"
    main(["generate", "--nodes", "3", "--seed", "11", "--out", str(twin)])
    assert out.read_text() == twin.read_text()


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["generate", "--out", str(tmp_path / "x.yaml")]) == 1
    assert main(["no-such-command"]) == 1
    assert main([]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def test_solve_artifacts(tmp_path, capsys):
    scenario = build_scenario([1, 1])
    path = save(tmp_path, scenario)
    out = tmp_path / "run"
    code = main(["solve", "--scenario", path, "--schedule", "1,2", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out.startswith("status=optimal")

    doc = read_json(out / "result.json")
    assert doc["status"] == "optimal"
    assert doc["order"] == [1, 2]
    assert doc["lower_bound"] == pytest.approx(lower_bound(scenario), rel=1e-12)
    assert doc["check"]["ok"] is True
    assert doc["objective"] < 1.0

    rows = read_lines(out / "trajectory.csv")
    assert rows[0] == "time_s,x_m,y_m,node"
    assert len(rows) == 5
    assert rows[1].startswith("0,0,0")
    assert rows[-1].split(",")[0] == "900"

    trace = read_lines(out / "aoi_trace.csv")
    assert trace[0] == "time_s,age_node_1_s,age_node_2_s"

    manifest = read_json(out / "manifest.json")
    assert manifest["command"] == "solve"
    assert manifest["version"] == aoiplan.__version__
    assert manifest["arguments"]["schedule"] == "1,2"
    assert "out" not in manifest["arguments"]


def test_solve_hover_objective(tmp_path):
    scenario = build_scenario(
        [1], positions=[(500.0, 500.0)], initial=(500.0, 500.0), final=(500.0, 500.0)
    )
    path = save(tmp_path, scenario)
    out = tmp_path / "run"
    assert main(["solve", "--scenario", path, "--schedule", "1", "--out", str(out)]) == 0
    doc = read_json(out / "result.json")
    assert doc["objective"] == pytest.approx(0.5, abs=1e-6)
    assert doc["times_s"][0] == pytest.approx(450.0, abs=1e-3)


def test_solve_infeasible_exit_2(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1]))
    out = tmp_path / "run"
    code = main(["solve", "--scenario", path, "--schedule", "1,1", "--out", str(out)])
    assert code == 2
    captured = capsys.readouterr()
    assert "cannot afford" in captured.err
    doc = read_json(out / "result.json")
    assert doc["status"] == "infeasible"
    assert doc["objective"] is None
    assert not (out / "trajectory.csv").exists()


def test_solve_missing_scenario_exit_3(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["solve", "--scenario", str(tmp_path / "nope.yaml"), "--out", str(out)])
    assert code == 3
    assert "not found" in capsys.readouterr().err


def test_solve_bad_schedule_exit_1(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1]))
    out = tmp_path / "run"
    code = main(["solve", "--scenario", path, "--schedule", "1,x", "--out", str(out)])
    assert code == 1
    assert "--schedule" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def worked_example():
    return build_scenario(
        [1, 2],
        positions=[(0.0, 0.0), (300.0, 0.0)],
        initial=(0.0, 0.0),
        final=(300.0, 0.0),
    )


def test_bounds_stdout_document(tmp_path, capsys):
    path = save(tmp_path, worked_example())
    assert main(["bounds", "--scenario", path]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["max_updates"] == [1, 2]
    assert doc["metric_floor"] == pytest.approx(5.0 / 12.0, abs=1e-12)
    assert doc["divisor_ok"] is True
    assert doc["sufficient_speed"] == 2.0
    assert doc["weight_guidance"] == pytest.approx([0.4, 0.6])
    assert doc["uniform_times"] == pytest.approx([300.0, 450.0, 600.0])
    assert doc["uniform_order"] == [2, 1, 2]


def test_bounds_artifacts(tmp_path, capsys):
    path = save(tmp_path, worked_example())
    out = tmp_path / "run"
    assert main(["bounds", "--scenario", path, "--out", str(out)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert read_json(out / "bounds.json") == doc
    assert read_json(out / "manifest.json")["command"] == "bounds"


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------


def test_enumerate_artifacts(tmp_path, capsys):
    scenario = build_scenario([1, 1])
    path = save(tmp_path, scenario)
    out = tmp_path / "run"
    assert main(["enumerate", "--scenario", path, "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("best order")
    doc = read_json(out / "result.json")
    assert doc["num_candidates"] == 5
    assert doc["num_solves"] == 4
    assert doc["objective"] >= doc["lower_bound"] - 1e-9
    assert doc["best_solution"]["status"] == "optimal"
    rows = read_lines(out / "enumeration.csv")
    assert rows[0] == "order,objective,status,kkt_residual"
    assert len(rows) == 6


def test_enumerate_budget_exit_4(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    code = main(["enumerate", "--scenario", path, "--budget", "3", "--out", str(out)])
    assert code == 4
    err = capsys.readouterr().err
    assert "5" in err and "3" in err
    assert not (out / "result.json").exists()


# ---------------------------------------------------------------------------
# train-dqn / eval
# ---------------------------------------------------------------------------


def test_train_dqn_artifacts_and_eval(tmp_path, capsys):
    scenario = build_scenario([1, 1])
    path = save(tmp_path, scenario)
    out = tmp_path / "run"
    argv = [
        "train-dqn",
        "--scenario", path,
        "--episodes", "6",
        "--seed", "5",
        "--hidden", "4",
        "--out", str(out),
    ]
    assert main(argv) == 0
    capsys.readouterr()

    train = read_json(out / "train.json")
    assert train["episodes"] == 6 and train["seed"] == 5
    assert 0.0 < train["greedy_nwaoi"] <= 1.0
    assert train["lower_bound"] == pytest.approx(lower_bound(scenario), rel=1e-12)
    assert len(read_lines(out / "learning_curve.csv")) == 7
    assert read_json(out / "manifest.json")["command"] == "train-dqn"

    agent = load_agent(out / "agent.ckpt", scenario)
    assert agent.repr.mode == "last_column"

    twin = tmp_path / "run2"
    assert main(argv[:-1] + [str(twin)]) == 0
    capsys.readouterr()
    assert (out / "learning_curve.csv").read_text() == (twin / "learning_curve.csv").read_text()

    code = main([
        "eval",
        "--scenario", path,
        "--policy", "dqn",
        "--checkpoint", str(out / "agent.ckpt"),
    ])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["nwaoi"] == train["greedy_nwaoi"]
    assert doc["order"] == train["greedy_order"]


def test_train_dqn_encoder_flag_validation(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    base = ["train-dqn", "--scenario", path, "--state-mode", "autoencoder", "--out", str(out)]
    assert main(base) == 1
    assert "--encoder" in capsys.readouterr().err
    code = main(base + ["--encoder", str(tmp_path / "missing.ckpt")])
    assert code == 3
    assert "not found" in capsys.readouterr().err


def test_train_dqn_with_encoder_round_trip(tmp_path, capsys):
    scenario = build_scenario([1, 1])
    path = save(tmp_path, scenario)
    ae_out = tmp_path / "ae"
    assert main([
        "train-autoencoder",
        "--scenario", path,
        "--corpus-episodes", "2",
        "--sizes", "4",
        "--epochs", "2",
        "--out", str(ae_out),
    ]) == 0
    dqn_out = tmp_path / "dqn"
    assert main([
        "train-dqn",
        "--scenario", path,
        "--episodes", "4",
        "--hidden", "4",
        "--state-mode", "autoencoder",
        "--encoder", str(ae_out / "autoencoder.ckpt"),
        "--out", str(dqn_out),
    ]) == 0
    capsys.readouterr()
    agent = load_agent(dqn_out / "agent.ckpt", scenario)
    assert agent.repr.mode == "autoencoder"
    assert main([
        "eval",
        "--scenario", path,
        "--policy", "dqn-lstm",
        "--checkpoint", str(dqn_out / "agent.ckpt"),
    ]) == 0
    capsys.readouterr()


# ---------------------------------------------------------------------------
# train-autoencoder
# ---------------------------------------------------------------------------


def test_train_autoencoder_artifacts(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    code = main([
        "train-autoencoder",
        "--scenario", path,
        "--corpus-episodes", "2",
        "--sizes", "2,4",
        "--epochs", "2",
        "--out", str(out),
    ])
    assert code == 0
    assert capsys.readouterr().out.startswith("best state size")
    train = read_json(out / "train.json")
    assert set(train["results"]) == {"2", "4"}
    assert train["best_size"] in (2, 4)
    assert train["num_train"] + train["num_test"] == train["corpus_states"]
    model, meta = load_autoencoder(out / "autoencoder.ckpt")
    assert meta["state_size"] == train["best_size"]
    assert model.state_size == train["best_size"]
    rows = read_lines(out / "search.csv")
    assert rows[0] == "state_size,test_mse"
    assert len(rows) == 3


def test_train_autoencoder_disjoint_ranges_exit_1(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    code = main([
        "train-autoencoder",
        "--scenario", path,
        "--corpus-episodes", "1",
        "--sizes", "2",
        "--hidden-sizes", "4",
        "--out", str(out),
    ])
    assert code == 1
    assert "coupled" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def test_eval_enumerate_document(tmp_path, capsys):
    scenario = build_scenario([1, 1])
    path = save(tmp_path, scenario)
    out = tmp_path / "run"
    code = main(["eval", "--scenario", path, "--policy", "enumerate", "--out", str(out)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["policy"] == "enumerate"
    assert doc["num_candidates"] == 5
    assert doc["nwaoi"] >= doc["lower_bound"] - 1e-9
    assert read_json(out / "eval.json") == doc
    assert read_json(out / "manifest.json")["command"] == "eval"


def test_eval_weight_deterministic(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    argv = ["eval", "--scenario", path, "--policy", "weight", "--episodes", "20", "--seed", "3"]
    assert main(argv) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(argv) == 0
    second = json.loads(capsys.readouterr().out)
    assert first == second
    assert 0.0 < first["best_nwaoi"] <= first["mean_nwaoi"] <= 1.0
    assert first["stderr_nwaoi"] >= 0.0
    assert first["episodes"] == 20


def test_eval_checkpoint_guards(tmp_path, capsys):
    scenario = build_scenario([1, 1])
    path = save(tmp_path, scenario)
    assert main(["eval", "--scenario", path, "--policy", "dqn"]) == 1
    assert "--checkpoint" in capsys.readouterr().err
    code = main([
        "eval", "--scenario", path, "--policy", "dqn",
        "--checkpoint", str(tmp_path / "nope.ckpt"),
    ])
    assert code == 3
    capsys.readouterr()

    out = tmp_path / "run"
    assert main([
        "train-dqn", "--scenario", path, "--episodes", "4",
        "--hidden", "4", "--out", str(out),
    ]) == 0
    capsys.readouterr()
    code = main([
        "eval", "--scenario", path, "--policy", "dqn-lstm",
        "--checkpoint", str(out / "agent.ckpt"),
    ])
    assert code == 3
    assert "state mode" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_energy_axis(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    code = main([
        "sweep",
        "--scenario", path,
        "--axis", "energy",
        "--values", "1.0,1.6",
        "--policies", "enumerate,weight",
        "--seeds", "0,1",
        "--out", str(out),
    ])
    assert code == 0
    assert "4 values" not in capsys.readouterr().out

    cells = read_lines(out / "cells.csv")
    assert cells[0] == "axis,value,policy,seed,nwaoi,lower_bound"
    assert len(cells) == 9

    rows = read_lines(out / "sweep.csv")
    assert rows[0] == "axis,value,policy,mean_nwaoi,stderr_nwaoi,lower_bound,num_seeds"
    assert len(rows) == 5
    table = {}
    for line in rows[1:]:
        axis, value, policy, mean, stderr, bound, n = line.split(",")
        assert axis == "energy" and n == "2"
        table[(float(value), policy)] = (float(mean), float(stderr), float(bound))
    # More battery admits more updates: optimum and floor both drop.
    assert table[(1.6, "enumerate")][0] < table[(1.0, "enumerate")][0]
    assert table[(1.6, "enumerate")][2] < table[(1.0, "enumerate")][2]
    # Exhaustive search ignores the seed, so its spread is exactly zero.
    assert table[(1.0, "enumerate")][1] == 0.0
    assert table[(1.0, "weight")][0] >= table[(1.0, "enumerate")][0] - 1e-9


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    base = [
        "sweep",
        "--scenario", path,
        "--axis", "speed",
        "--values", "20,30",
        "--policies", "weight",
        "--seeds", "0,1",
    ]
    assert main(base + ["--workers", "1", "--out", str(serial)]) == 0
    assert main(base + ["--workers", "2", "--out", str(parallel)]) == 0
    capsys.readouterr()
    assert (serial / "cells.csv").read_text() == (parallel / "cells.csv").read_text()
    assert (serial / "sweep.csv").read_text() == (parallel / "sweep.csv").read_text()


def test_sweep_nodes_axis_validation(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    code = main([
        "sweep", "--scenario", path, "--axis", "nodes",
        "--values", "3", "--out", str(out),
    ])
    assert code == 2
    assert "template" in capsys.readouterr().err

    ok = main([
        "sweep", "--scenario", path, "--axis", "nodes",
        "--values", "1,2", "--policies", "enumerate", "--out", str(out),
    ])
    assert ok == 0
    capsys.readouterr()
    rows = read_lines(out / "sweep.csv")
    assert len(rows) == 3


def test_sweep_usage_errors(tmp_path, capsys):
    path = save(tmp_path, build_scenario([1, 1]))
    out = tmp_path / "run"
    code = main([
        "sweep", "--scenario", path, "--axis", "energy",
        "--values", "1.0", "--policies", "warp", "--out", str(out),
    ])
    assert code == 1
    assert "warp" in capsys.readouterr().err
    code = main([
        "sweep", "--scenario", path, "--axis", "energy",
        "--values", "x", "--out", str(out),
    ])
    assert code == 1
    capsys.readouterr()
