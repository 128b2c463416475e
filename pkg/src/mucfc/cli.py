"""Command-line interface: ``mucfc {simulate,experiment,validate,generate}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import validation
from .allocation import ShapleyCache
from .dynamics import DynamicsConfig, Gate, run, write_trace_csv
from .experiments import (DEFAULT_ROUNDS, PRESETS, curves_csv, grid_plan, mean_curves, preset,
                          results_csv, run_plan)
from .model import ScenarioFormatError, load_scenario, save_scenario
from .preferences import OrderKind
from .scenario_gen import GenConfig, GenerationError, generate

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _order_list(text: str) -> list[OrderKind]:
    try:
        return [OrderKind.parse(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _uint(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_generator_flags(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--uavs", type=_pos_int, required=required, help="number of UAVs N")
    p.add_argument("--tasks", type=_pos_int, required=required, help="number of tasks M")
    p.add_argument("--r", type=float, default=0.006, help="flight cost to task value ratio (default 0.006)")
    p.add_argument("--xi-min", type=float, default=1.0, help="lower bound of workload/value ratio")
    p.add_argument("--xi-max", type=float, default=1.5, help="upper bound of workload/value ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mucfc", description="Multi-UAV coalition formation games.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run one scenario and export its trace")
    _add_generator_flags(sim)
    sim.add_argument("--scenario", type=Path, help="load the scenario from a JSON file instead of generating it")
    sim.add_argument("--order", choices=[o.value for o in OrderKind], default="marginal")
    sim.add_argument("--gate", choices=[g.value for g in Gate], default="off")
    sim.add_argument("--seed", type=_uint, default=0)
    sim.add_argument("--max-iters", type=_pos_int, default=None)
    sim.add_argument("--trace", type=Path, help="write the per-iteration trace CSV here")
    sim.add_argument("--out", type=Path, help="write the final partition summary (JSON) here")

    exp = sub.add_parser("experiment", help="Monte Carlo comparison of preference orders")
    exp.add_argument("preset", nargs="?", choices=PRESETS, help="figure preset; omit to use explicit grids")
    exp.add_argument("--uavs", type=_pos_int, help="fixed N for sweeps over M")
    exp.add_argument("--tasks", type=_pos_int, help="fixed M for sweeps over N")
    exp.add_argument("--uavs-grid", type=_int_list)
    exp.add_argument("--tasks-grid", type=_int_list)
    exp.add_argument("--r-grid", type=_float_list)
    exp.add_argument("--orders", type=_order_list)
    exp.add_argument("--gate", choices=[g.value for g in Gate], default="off",
                     help="admissibility gate for the marginal order (baselines never gate)")
    exp.add_argument("--rounds", type=_pos_int, default=DEFAULT_ROUNDS)
    exp.add_argument("--seed", type=_uint, default=0)
    exp.add_argument("--max-iters", type=_pos_int, default=None)
    exp.add_argument("--xi-min", type=float, default=1.0)
    exp.add_argument("--xi-max", type=float, default=1.5)
    exp.add_argument("--out", type=Path, help="CSV destination (stdout when omitted)")

    val = sub.add_parser("validate", help="run the invariant self-checks")
    val.add_argument("--suite", action="append", choices=sorted(validation.SUITES) + ["all"],
                     help="suite to run (repeatable, default all)")
    val.add_argument("--trials", type=_pos_int, default=None, help="trials per suite (default: per-suite)")
    val.add_argument("--seed", type=_uint, default=0)

    gen = sub.add_parser("generate", help="write a random scenario file")
    _add_generator_flags(gen, required=True)
    gen.add_argument("--seed", type=_uint, default=0)
    gen.add_argument("--out", type=Path, required=True)
    return parser


def _gen_config(args, seed: int) -> GenConfig:
    try:
        return GenConfig(args.uavs, args.tasks, r=args.r, xi_range=(args.xi_min, args.xi_max), seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    if args.scenario is not None:
        scenario = load_scenario(args.scenario)
    else:
        if args.uavs is None or args.tasks is None:
            raise UsageError("simulate needs --uavs and --tasks unless --scenario is given")
        scenario = generate(_gen_config(args, args.seed))
    config = DynamicsConfig(args.order, args.gate, args.max_iters, None, args.seed)
    cache = ShapleyCache(scenario)
    trace = run(scenario, config, cache=cache)
    if args.trace:
        write_trace_csv(trace, args.trace)
    final = trace.final_assignment
    coalitions = []
    for task_id, members in enumerate(final.coalitions(scenario.n_tasks)):
        shares = cache.shares(task_id, members) if members else {}
        coalitions.append({"task": task_id, "members": list(members),
                           "utility": sum(shares.values()),
                           "shares": {str(j): u for j, u in shares.items()}})
        print(f"task {task_id}: members={list(members)} utility={sum(shares.values()):.6f}")
    print(f"total_utility={trace.final_total_utility!r}")
    print(f"iterations={trace.n_iterations} accepted={trace.n_accepted} converged={trace.converged}")
    if args.out:
        summary = {"order": config.order.value, "gate": config.gate.value, "seed": args.seed,
                   "total_utility": trace.final_total_utility, "potential": trace.final_potential,
                   "iterations": trace.n_iterations, "converged": trace.converged,
                   "selection": list(final.selection), "coalitions": coalitions}
        args.out.write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    for name in ("uavs_grid", "tasks_grid", "r_grid", "orders"):
        if getattr(args, name) is not None and not getattr(args, name):
            raise UsageError(f"--{name.replace('_', '-')} is empty")
    kwargs = dict(rounds=args.rounds, seed=args.seed, gate=Gate.parse(args.gate),
                  xi_range=(args.xi_min, args.xi_max), max_iterations=args.max_iters)
    try:
        if args.preset:
            plan = preset(args.preset, uavs=args.uavs, tasks=args.tasks, uavs_grid=args.uavs_grid,
                          tasks_grid=args.tasks_grid, r_grid=args.r_grid, orders=args.orders, **kwargs)
        else:
            if not args.uavs_grid or not args.tasks_grid:
                raise UsageError("without a preset, --uavs-grid and --tasks-grid are required")
            if args.orders:
                kwargs["orders"] = tuple(args.orders)
            plan = grid_plan(args.uavs_grid, args.tasks_grid, args.r_grid or [0.006], **kwargs)
        rows, raw = run_plan(plan)
    except (ValueError, GenerationError) as exc:
        raise UsageError(str(exc)) from None
    text = curves_csv(mean_curves(raw)) if plan.curves else results_csv(rows)
    if args.out:
        args.out.write_text(text)
        print(f"wrote {len(text.splitlines()) - 1} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    names = args.suite or ["all"]
    if "all" in names:
        names = list(validation.SUITES)
    failed = False
    for name in dict.fromkeys(names):
        res = validation.run_suite(name, args.trials, args.seed)
        print(f"{name}: {res.passed}/{res.total} passed")
        for violated, seed in res.failures[:5]:
            print(f"  FAIL {violated} (seed={seed})")
        failed |= not res.ok
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_generate(args) -> int:
    save_scenario(generate(_gen_config(args, args.seed)), args.out)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "experiment": cmd_experiment,
            "validate": cmd_validate, "generate": cmd_generate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mucfc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ScenarioFormatError) as exc:
        print(f"mucfc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
