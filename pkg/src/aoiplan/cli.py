"""Command-line front end: solve, bound, enumerate, train, evaluate, sweep.

Every command that writes artifacts also writes a manifest.json capturing
the command, its arguments, the seed, and the package version, so any
output directory can be reproduced from its manifest alone. Exit codes:
0 success, 1 usage, 2 infeasible or solver failure, 3 missing artifact,
4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .agents import (
    AutoencoderConfig,
    DqnConfig,
    autoencoder_search,
    autoencoder_train,
    collect_states,
    dqn_train,
    greedy_evaluate,
    load_agent,
    load_autoencoder,
    save_agent,
    save_autoencoder,
    weight_based_rollout,
    write_learning_curve_csv,
)
from .bounds import bound_report, lower_bound
from .errors import (
    BudgetExceededError,
    CheckpointError,
    CoincidentTimesError,
    DivergenceError,
    NonFiniteGradientError,
    ScenarioError,
    ScheduleError,
)
from .exhaustive import DEFAULT_BUDGET, enumerate_optimal
from .physics import write_aoi_trace_csv
from .scenario import (
    Scenario,
    from_document,
    generate_scenario,
    load_scenario,
    save_scenario,
)
from .solver import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    STATUS_OPTIMAL,
    check_solution,
    solve_schedule,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_MISSING = 3
EXIT_BUDGET = 4

SWEEP_AXES = ("nodes", "energy", "horizon", "speed")
EVAL_POLICIES = ("enumerate", "weight", "dqn", "dqn-lstm")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's 2
        raise _UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------


def _parse_ints(text: str, flag: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise _UsageError(f"{flag} expects a comma-separated integer list: {exc}") from exc


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise _UsageError(f"{flag} expects a comma-separated number list: {exc}") from exc


def _load(path: str) -> Scenario:
    if not Path(path).is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    return load_scenario(path)


def _ensure_out(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: Path, command: str, args: argparse.Namespace) -> None:
    skip = {"func", "out"}
    arguments = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in skip
    }
    _write_json(
        out / "manifest.json",
        {
            "command": command,
            "version": __version__,
            "seed": getattr(args, "seed", None),
            "arguments": arguments,
        },
    )


def _print_doc(doc: dict[str, Any]) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    scenario = generate_scenario(
        args.nodes,
        seed=args.seed,
        region=args.region,
        altitude_m=args.altitude,
        vmax=args.vmax,
        horizon_s=args.horizon,
    )
    save_scenario(scenario, args.out)
    print(f"wrote scenario with {args.nodes} nodes to {args.out}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    order = tuple(_parse_ints(args.schedule, "--schedule"))
    solution = solve_schedule(scenario, order, tol=args.tol, max_iters=args.max_iters)
    doc = solution.to_document()
    doc["lower_bound"] = lower_bound(scenario)
    if solution.status == STATUS_OPTIMAL:
        report = check_solution(scenario, solution, tol=args.tol)
        doc["check"] = report.to_document()
    out = _ensure_out(args.out)
    _write_json(out / "result.json", doc)
    _write_manifest(out, "solve", args)
    if solution.status == STATUS_OPTIMAL:
        solution.write_trajectory_csv(out / "trajectory.csv", scenario)
        write_aoi_trace_csv(
            out / "aoi_trace.csv", scenario, solution.update_times(scenario.num_nodes)
        )
    print(f"status={solution.status} objective={solution.objective:.10g}")
    if solution.status != STATUS_OPTIMAL:
        if solution.message:
            print(solution.message, file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    doc = bound_report(scenario).to_document()
    if args.out:
        out = _ensure_out(args.out)
        _write_json(out / "bounds.json", doc)
        _write_manifest(out, "bounds", args)
    _print_doc(doc)
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    result = enumerate_optimal(scenario, budget=args.budget, tol=args.tol)
    doc = result.to_document()
    doc["lower_bound"] = lower_bound(scenario)
    if result.best_solution is not None:
        doc["best_solution"] = result.best_solution.to_document()
    out = _ensure_out(args.out)
    _write_json(out / "result.json", doc)
    result.write_table_csv(out / "enumeration.csv")
    _write_manifest(out, "enumerate", args)
    print(
        f"best order {'-'.join(map(str, result.best_order)) or '(none)'} "
        f"objective={result.objective:.10g} solves={result.num_solves}"
    )
    return EXIT_OK


def _dqn_config(args: argparse.Namespace) -> DqnConfig:
    return DqnConfig(
        hidden_sizes=tuple(_parse_ints(args.hidden, "--hidden")),
        lr=args.lr,
        optimizer=args.optimizer,
        epsilon_end=args.epsilon_end,
        epsilon_decay_frac=args.epsilon_decay_frac,
        batch_size=args.batch_size,
        grad_steps_per_episode=args.grad_steps,
        infeasible_penalty=args.penalty,
        state_mode=args.state_mode,
    )


def cmd_train_dqn(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    encoder = None
    if args.state_mode == "autoencoder":
        if not args.encoder:
            raise _UsageError("--state-mode autoencoder requires --encoder")
        if not Path(args.encoder).is_file():
            raise FileNotFoundError(f"encoder checkpoint not found: {args.encoder}")
        model, _ = load_autoencoder(args.encoder)
        encoder = model.encoder
    config = _dqn_config(args)
    agent, curve = dqn_train(scenario, config, episodes=args.episodes, seed=args.seed, encoder=encoder)
    order, metric = greedy_evaluate(agent, scenario)
    out = _ensure_out(args.out)
    save_agent(out / "agent.ckpt", agent)
    write_learning_curve_csv(out / "learning_curve.csv", curve)
    _write_json(
        out / "train.json",
        {
            "episodes": args.episodes,
            "seed": args.seed,
            "greedy_order": list(order),
            "greedy_nwaoi": metric,
            "lower_bound": lower_bound(scenario),
            "final_loss": curve[-1].loss if curve else None,
        },
    )
    _write_manifest(out, "train-dqn", args)
    print(f"greedy order {'-'.join(map(str, order)) or '(none)'} nwaoi={metric:.10g}")
    return EXIT_OK


def cmd_train_autoencoder(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    corpus = collect_states(scenario, episodes=args.corpus_episodes, seed=args.seed)
    config = AutoencoderConfig(
        lr=args.lr, optimizer=args.optimizer, epochs=args.epochs, batch=args.batch
    )
    sizes = _parse_ints(args.sizes, "--sizes")
    hidden = _parse_ints(args.hidden_sizes, "--hidden-sizes") if args.hidden_sizes else None
    try:
        search = autoencoder_search(
            scenario, corpus, cell_sizes=sizes, hidden_sizes=hidden, config=config, seed=args.seed
        )
    except ValueError as exc:  # disjoint candidate ranges are a flag-level mistake
        raise _UsageError(str(exc)) from exc
    out = _ensure_out(args.out)
    save_autoencoder(
        out / "autoencoder.ckpt",
        search.best.model,
        {"test_mse": search.best.test_mse, "corpus_states": len(corpus)},
    )
    with open(out / "search.csv", "w", encoding="utf-8") as fh:
        fh.write("state_size,test_mse\n")
        for size in sorted(search.results):
            fh.write(f"{size},{search.results[size]:.10g}\n")
    _write_json(
        out / "train.json",
        {
            "best_size": search.best_size,
            "results": {str(k): v for k, v in search.results.items()},
            "corpus_states": len(corpus),
            "num_train": search.best.num_train,
            "num_test": search.best.num_test,
            "seed": args.seed,
        },
    )
    _write_manifest(out, "train-autoencoder", args)
    print(f"best state size {search.best_size} test_mse={search.best.test_mse:.6g}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    doc: dict[str, Any] = {"policy": args.policy, "lower_bound": lower_bound(scenario)}
    if args.policy == "enumerate":
        result = enumerate_optimal(scenario, budget=args.budget, keep_rows=False)
        doc.update(
            {
                "order": list(result.best_order),
                "nwaoi": result.objective,
                "num_candidates": result.num_candidates,
                "num_solves": result.num_solves,
            }
        )
    elif args.policy == "weight":
        master = np.random.default_rng(args.seed)
        seeds = master.integers(0, 2**63 - 1, size=args.episodes)
        cache: dict = {}
        metrics = []
        best: tuple[float, tuple[int, ...]] | None = None
        for s in seeds:
            order, metric, _ = weight_based_rollout(scenario, int(s), solve_cache=cache)
            metrics.append(metric)
            if best is None or (metric, order) < best:
                best = (metric, order)
        arr = np.asarray(metrics)
        stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        assert best is not None
        doc.update(
            {
                "episodes": args.episodes,
                "mean_nwaoi": float(arr.mean()),
                "stderr_nwaoi": stderr,
                "best_order": list(best[1]),
                "best_nwaoi": best[0],
            }
        )
    else:  # dqn or dqn-lstm
        if not args.checkpoint:
            raise _UsageError(f"--policy {args.policy} requires --checkpoint")
        if not Path(args.checkpoint).is_file():
            raise FileNotFoundError(f"checkpoint not found: {args.checkpoint}")
        agent = load_agent(args.checkpoint, scenario)
        wanted = "autoencoder" if args.policy == "dqn-lstm" else "last_column"
        assert agent.repr is not None
        if agent.repr.mode != wanted:
            raise CheckpointError(
                f"policy {args.policy} needs a checkpoint with state mode "
                f"{wanted!r}, found {agent.repr.mode!r}"
            )
        order, metric = greedy_evaluate(agent, scenario)
        doc.update({"order": list(order), "nwaoi": metric})
    if args.out:
        out = _ensure_out(args.out)
        _write_json(out / "eval.json", doc)
        _write_manifest(out, "eval", args)
    _print_doc(doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def _apply_axis(doc: dict[str, Any], axis: str, value: float) -> Scenario:
    doc = json.loads(json.dumps(doc))
    if axis == "horizon":
        doc["uav"]["horizon_s"] = float(value)
    elif axis == "speed":
        doc["uav"]["vmax_x"] = float(value)
        doc["uav"]["vmax_y"] = float(value)
    elif axis == "energy":
        for node in doc["nodes"]:
            node["battery_j"] = node["battery_j"] * float(value)
    elif axis == "nodes":
        count = int(value)
        if count < 1 or count > len(doc["nodes"]):
            raise ScenarioError(
                f"nodes axis value {count} outside 1..{len(doc['nodes'])} "
                "(template must carry at least max(values) nodes)"
            )
        kept = doc["nodes"][:count]
        total = sum(node["weight"] for node in kept)
        for node in kept:
            node["weight"] = node["weight"] / total
        doc["nodes"] = kept
    else:
        raise _UsageError(f"unknown sweep axis {axis!r}")
    return from_document(doc)


def _sweep_cell(payload: tuple) -> tuple[float, str, int, float, float]:
    doc, axis, value, policy, seed, knobs = payload
    scenario = _apply_axis(doc, axis, value)
    bound = lower_bound(scenario)
    if policy == "enumerate":
        metric = enumerate_optimal(scenario, budget=knobs["budget"], keep_rows=False).objective
    elif policy == "weight":
        _, metric, _ = weight_based_rollout(scenario, seed)
    elif policy in {"dqn", "dqn-lstm"}:
        encoder = None
        mode = "last_column"
        if policy == "dqn-lstm":
            corpus = collect_states(scenario, episodes=knobs["corpus_episodes"], seed=seed)
            ae = autoencoder_train(
                scenario,
                corpus,
                AutoencoderConfig(state_size=knobs["state_size"], epochs=knobs["ae_epochs"]),
                seed=seed,
            )
            encoder = ae.model.encoder
            mode = "autoencoder"
        config = DqnConfig(
            lr=knobs["lr"],
            optimizer=knobs["optimizer"],
            grad_steps_per_episode=knobs["grad_steps"],
            state_mode=mode,
        )
        agent, _ = dqn_train(scenario, config, episodes=knobs["episodes"], seed=seed, encoder=encoder)
        _, metric = greedy_evaluate(agent, scenario)
    else:
        raise _UsageError(f"unknown policy {policy!r}")
    return float(value), policy, seed, float(metric), bound


def cmd_sweep(args: argparse.Namespace) -> int:
    template = _load(args.scenario)
    values = _parse_floats(args.values, "--values")
    seeds = _parse_ints(args.seeds, "--seeds")
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    for policy in policies:
        if policy not in EVAL_POLICIES:
            raise _UsageError(f"unknown policy {policy!r}; choose from {EVAL_POLICIES}")
    if not values or not seeds or not policies:
        raise _UsageError("--values, --seeds, and --policies must be non-empty")

    knobs = {
        "budget": args.budget,
        "episodes": args.episodes,
        "lr": args.lr,
        "optimizer": args.optimizer,
        "grad_steps": args.grad_steps,
        "corpus_episodes": args.corpus_episodes,
        "state_size": args.state_size,
        "ae_epochs": args.ae_epochs,
    }
    doc = template.to_document()
    cells = [
        (doc, args.axis, value, policy, seed, knobs)
        for value in values
        for policy in policies
        for seed in seeds
    ]
    workers = args.workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_sweep_cell, cells))
    else:
        raw = [_sweep_cell(cell) for cell in cells]
    # Deterministic aggregation independent of evaluation order.
    raw.sort(key=lambda row: (row[0], row[1], row[2]))

    out = _ensure_out(args.out)
    with open(out / "cells.csv", "w", encoding="utf-8") as fh:
        fh.write("axis,value,policy,seed,nwaoi,lower_bound\n")
        for value, policy, seed, metric, bound in raw:
            fh.write(f"{args.axis},{value:.10g},{policy},{seed},{metric:.10g},{bound:.10g}\n")
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("axis,value,policy,mean_nwaoi,stderr_nwaoi,lower_bound,num_seeds\n")
        for value in values:
            for policy in policies:
                metrics = np.array(
                    [m for v, p, _, m, _ in raw if v == float(value) and p == policy]
                )
                bounds = np.array(
                    [b for v, p, _, _, b in raw if v == float(value) and p == policy]
                )
                stderr = (
                    float(metrics.std(ddof=1) / np.sqrt(metrics.size))
                    if metrics.size > 1
                    else 0.0
                )
                fh.write(
                    f"{args.axis},{value:.10g},{policy},{metrics.mean():.10g},"
                    f"{stderr:.10g},{bounds.mean():.10g},{metrics.size}\n"
                )
    _write_manifest(out, "sweep", args)
    print(f"wrote {len(raw)} cells across {len(values)} values to {out / 'sweep.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="aoiplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random scenario file")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--region", type=float, default=1000.0)
    p.add_argument("--altitude", type=float, default=80.0)
    p.add_argument("--vmax", type=float, default=25.0)
    p.add_argument("--horizon", type=float, default=900.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve the trajectory for a fixed visit order")
    p.add_argument("--scenario", required=True)
    p.add_argument("--schedule", default="", help="comma list of node indices, e.g. 1,2,1")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bounds", help="closed-form bounds and speed sufficiency")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("enumerate", help="exhaustive search over visit orders")
    p.add_argument("--scenario", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("train-dqn", help="train the action-value planner")
    p.add_argument("--scenario", required=True)
    p.add_argument("--episodes", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", default="64")
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--optimizer", default="adam", choices=["sgd", "adam"])
    p.add_argument("--epsilon-end", type=float, default=0.02)
    p.add_argument("--epsilon-decay-frac", type=float, default=0.6)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--grad-steps", type=int, default=4)
    p.add_argument("--penalty", type=float, default=0.0)
    p.add_argument("--state-mode", default="last_column", choices=["last_column", "autoencoder"])
    p.add_argument("--encoder", default=None, help="autoencoder checkpoint for --state-mode autoencoder")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_dqn)

    p = sub.add_parser("train-autoencoder", help="train the recurrent state encoder")
    p.add_argument("--scenario", required=True)
    p.add_argument("--corpus-episodes", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", default="4,8,16", help="candidate state sizes, comma list")
    p.add_argument("--hidden-sizes", default=None, help="optional second range; must intersect --sizes")
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--optimizer", default="adam", choices=["sgd", "adam"])
    p.add_argument("--batch", default="stochastic", choices=["stochastic", "full"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_autoencoder)

    p = sub.add_parser("eval", help="evaluate a planning policy on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policy", required=True, choices=list(EVAL_POLICIES))
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=100, help="rollouts for the weight policy")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="policy comparison across a scenario axis")
    p.add_argument("--scenario", required=True, help="template scenario file")
    p.add_argument("--axis", required=True, choices=list(SWEEP_AXES))
    p.add_argument("--values", required=True, help="comma list of axis values")
    p.add_argument("--policies", default="enumerate,weight")
    p.add_argument("--seeds", default="0")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--episodes", type=int, default=300, help="training episodes per dqn cell")
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--optimizer", default="adam", choices=["sgd", "adam"])
    p.add_argument("--grad-steps", type=int, default=4)
    p.add_argument("--corpus-episodes", type=int, default=40)
    p.add_argument("--state-size", type=int, default=8)
    p.add_argument("--ae-epochs", type=int, default=30)
    p.add_argument(
        "--workers",
        type=int,
        default=int(os.environ.get("AOIPLAN_WORKERS", "1")),
        help="parallel cell evaluations (default from AOIPLAN_WORKERS)",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_MISSING
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except BudgetExceededError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BUDGET
    except (
        ScenarioError,
        ScheduleError,
        CoincidentTimesError,
        DivergenceError,
        NonFiniteGradientError,
    ) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
