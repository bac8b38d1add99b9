"""Batch command-line interface.

    intermit solve CONFIG [--trial K] [--out DIR]
    intermit oracle CONFIG [--trial K] [--out DIR]
    intermit mc CONFIG [--trials N] [--seed S] [--out DIR] [--jobs J]
    intermit verify-matroids CONFIG [--count N] [--seed S] [--max-elements M]
    intermit sim-field CONFIG [--trial K] [--out DIR]

Exit codes: 0 success, 2 bad config or input, 3 a matroid-axiom
counterexample was found, 4 the enumeration budget was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .constraints import verify_matroid_axioms
from .envsim import field_values
from .harness import (ConfigError, ExperimentConfig, emit_outputs,
                      random_matroid_spec, run_monte_carlo, sample_instance,
                      small_ground_sets)
from .oracle import OracleBudgetExceeded, enumerate_optimal
from .solver import SolverConfig, optimality_bound, threshold_greedy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COUNTEREXAMPLE = 3
EXIT_BUDGET = 4


def _write_schedule(selection, ground, path: Path) -> None:
    rows = sorted(((ground[i].t, ground[i].r, ground[i].location, ground[i].position[0],
                    ground[i].position[1], ground[i].cost) for i in selection))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "r", "i", "x", "y", "cost"])
        for t, r, i, x, y, cost in rows:
            writer.writerow([t, r, i, repr(x), repr(y), repr(cost)])


def _cmd_solve(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    sampled = sample_instance(cfg, args.trial)
    result = threshold_greedy(sampled.instance, SolverConfig(eta=cfg.eta))
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_schedule(result.chosen, sampled.instance.ground, out / "schedule.csv")
    summary = {
        "command": "solve",
        "trial": args.trial,
        "objective": result.value,
        "bound": result.bound,
        "oracle_calls": result.oracle_calls,
        "wall_time_seconds": result.wall_time,
        "n_selected": len(result.chosen),
        "knapsack_feasible": result.knapsack_feasible,
        "dims": {"p": sampled.dims.p, "q": sampled.dims.q, "horizon": sampled.dims.horizon,
                 "n_robots": sampled.dims.n_robots, "active_limit": sampled.dims.active_limit},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"solve: objective {result.value:.6f} with {len(result.chosen)} deployments "
          f"({result.oracle_calls} gain queries); outputs in {out}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    sampled = sample_instance(cfg, args.trial)
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    code = EXIT_OK
    try:
        result = enumerate_optimal(sampled.instance, cfg.oracle_budget())
    except OracleBudgetExceeded as exc:
        result = exc.partial
        code = EXIT_BUDGET
        print(f"oracle: budget exceeded ({exc}); best-so-far written, NOT optimal",
              file=sys.stderr)
    _write_schedule(result.best, sampled.instance.ground, out / "schedule.csv")
    summary = {
        "command": "oracle",
        "trial": args.trial,
        "objective": result.value,
        "sets_visited": result.sets_visited,
        "wall_time_seconds": result.elapsed,
        "complete": result.complete,
        "n_selected": len(result.best),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if result.complete:
        print(f"oracle: optimum {result.value:.6f} over {result.sets_visited} feasible sets; "
              f"outputs in {out}")
    return code


def _cmd_mc(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    records, failures = run_monte_carlo(cfg, jobs=args.jobs)
    manifest = emit_outputs(records, cfg.out_dir, cfg, failures)
    done = [r for r in records if r.ratio is not None]
    bound = optimality_bound(len(cfg.matroids), len(cfg.knapsacks), cfg.eta)
    print(f"mc: {len(records)} trials, {len(done)} with exact baselines, "
          f"{len(records) - len(done)} excluded by the enumeration budget, "
          f"{len(failures)} failures")
    if done:
        worst = min(r.ratio for r in done)
        print(f"mc: worst ratio {worst:.4f} against guarantee {bound:.4f}")
    print("mc: outputs " + ", ".join(str(p) for p in manifest.values()))
    return EXIT_OK


def _cmd_verify_matroids(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    rng = np.random.default_rng(args.seed)
    pools = small_ground_sets(rng, args.count, args.max_elements)
    variants = [token.split(":", 1)[0] for token in cfg.matroids]
    failed = 0
    for k, ground in enumerate(pools):
        for variant in variants:
            spec = random_matroid_spec(variant, ground, rng)
            report = verify_matroid_axioms(spec, ground, cap=args.max_elements)
            if report.passed:
                print(f"pool {k} ({ground.grid.p}x{ground.grid.q} grid, "
                      f"{ground.n_robots} robots, T={ground.horizon}): {variant} ok "
                      f"({report.n_independent}/{report.n_subsets} independent)")
            else:
                failed += 1
                print(f"pool {k}: {variant} VIOLATES axiom {report.axiom}: {report.message} "
                      f"(limit {spec.limit})")
    if failed:
        print(f"verify-matroids: {failed} counterexample(s) found", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    print("verify-matroids: all checks passed")
    return EXIT_OK


def _cmd_sim_field(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    sampled = sample_instance(cfg, args.trial)
    ground = sampled.instance.ground
    grid = ground.grid
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    points = np.asarray([grid.cell_center(i) for i in range(1, grid.n_cells + 1)])
    path = out / "field.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "i", "x", "y", "value"])
        for t in range(0, sampled.dims.horizon + 1):
            state = sampled.trajectory.state_at(float(t))
            values = field_values(state, cfg.gmm(), points)
            for i, ((x, y), v) in enumerate(zip(points, values), start=1):
                writer.writerow([t, i, repr(float(x)), repr(float(y)), repr(float(v))])
    print(f"sim-field: wrote {path} ({grid.n_cells} cells x {sampled.dims.horizon + 1} times)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intermit",
                                     description="intermittent sensing-schedule tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trial=True):
        p.add_argument("config", help="experiment config file (INI)")
        if trial:
            p.add_argument("--trial", type=int, default=0,
                           help="trial index selecting the sampled instance (default 0)")
        p.add_argument("--out", default=None, help="output directory override")

    common(sub.add_parser("solve", help="run the threshold greedy on one instance"))
    common(sub.add_parser("oracle", help="run the exact enumeration on one instance"))

    mc = sub.add_parser("mc", help="Monte Carlo greedy-vs-exact sweep")
    mc.add_argument("config")
    mc.add_argument("--trials", type=int, default=None)
    mc.add_argument("--seed", type=int, default=None)
    mc.add_argument("--out", default=None)
    mc.add_argument("--jobs", type=int, default=1)

    vm = sub.add_parser("verify-matroids",
                        help="exhaustive axiom check of the configured matroid rules")
    vm.add_argument("config")
    vm.add_argument("--count", type=int, default=20, help="number of random pools")
    vm.add_argument("--seed", type=int, default=0)
    vm.add_argument("--max-elements", type=int, default=12)

    common(sub.add_parser("sim-field", help="export the simulated field per time step"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "oracle": _cmd_oracle,
        "mc": _cmd_mc,
        "verify-matroids": _cmd_verify_matroids,
        "sim-field": _cmd_sim_field,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
