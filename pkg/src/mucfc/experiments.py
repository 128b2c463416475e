"""Monte Carlo comparison of preference orders over generated scenarios.

Every round of a group draws a fresh scenario and an initial partition from
seeds derived from ``(base_seed, n_uavs, n_tasks, round)``. The derivation
ignores ``r`` and the order, so all orders in a sweep are compared on the
same scenarios and starting partitions.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DynamicsConfig, Gate, run
from .preferences import OrderKind
from .scenario_gen import GenConfig, generate

__all__ = [
    "RESULT_HEADER",
    "CURVE_HEADER",
    "ExperimentResult",
    "RoundSpec",
    "RoundOutcome",
    "ExperimentPlan",
    "round_seeds",
    "run_round",
    "run_rounds",
    "run_plan",
    "aggregate",
    "mean_curves",
    "results_csv",
    "curves_csv",
    "preset",
    "grid_plan",
    "PRESETS",
    "DEFAULT_ROUNDS",
    "worker_count",
]

RESULT_HEADER = ("r", "order", "n_uavs", "n_tasks", "rounds", "mean_total_utility", "std_total_utility",
                 "mean_per_task_utility", "mean_per_uav_utility", "mean_iterations", "convergence_rate")
CURVE_HEADER = ("order", "iteration", "mean_total_utility")
DEFAULT_ROUNDS = 50
ALL_ORDERS = (OrderKind.MARGINAL, OrderKind.SELFISH, OrderKind.PARETO)


@dataclass(frozen=True)
class ExperimentResult:
    r: float
    order: OrderKind
    n_uavs: int
    n_tasks: int
    rounds: int
    mean_total_utility: float
    std_total_utility: float
    mean_per_task_utility: float
    mean_per_uav_utility: float
    mean_iterations: float
    convergence_rate: float

    def row(self) -> list:
        return [repr(self.r), self.order.value, self.n_uavs, self.n_tasks, self.rounds,
                repr(self.mean_total_utility), repr(self.std_total_utility),
                repr(self.mean_per_task_utility), repr(self.mean_per_uav_utility),
                repr(self.mean_iterations), repr(self.convergence_rate)]


@dataclass(frozen=True)
class RoundSpec:
    n_uavs: int
    n_tasks: int
    r: float
    order: OrderKind
    gate: Gate
    scenario_seed: int
    rng_seed: int
    xi_range: tuple[float, float] = (1.0, 1.5)
    max_iterations: int | None = None
    keep_curve: bool = False


@dataclass(frozen=True)
class RoundOutcome:
    final_total_utility: float
    final_potential: float
    n_iterations: int
    converged: bool
    curve: tuple[float, ...] = ()


def round_seeds(base_seed: int, n_uavs: int, n_tasks: int, round_index: int) -> tuple[int, int]:
    """Scenario seed and dynamics seed for one round."""
    state = np.random.SeedSequence([base_seed, n_uavs, n_tasks, round_index]).generate_state(2)
    return int(state[0]), int(state[1])


def run_round(spec: RoundSpec) -> RoundOutcome:
    scenario = generate(GenConfig(spec.n_uavs, spec.n_tasks, r=spec.r, xi_range=spec.xi_range,
                                  seed=spec.scenario_seed))
    trace = run(scenario, DynamicsConfig(spec.order, spec.gate, spec.max_iterations, None, spec.rng_seed))
    curve = ()
    if spec.keep_curve:
        curve = tuple([trace.initial_total_utility] + [r.total_utility for r in trace.iterations])
    return RoundOutcome(trace.final_total_utility, trace.final_potential, trace.n_iterations,
                        trace.converged, curve)


def worker_count() -> int:
    """Concurrent rounds, capped by ``MUCFC_THREADS`` when set."""
    env = os.environ.get("MUCFC_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"MUCFC_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"MUCFC_THREADS must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def run_rounds(specs: Sequence[RoundSpec], workers: int | None = None) -> list[RoundOutcome]:
    """Run rounds, returning outcomes in input order regardless of scheduling."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(specs) <= 1:
        return [run_round(s) for s in specs]
    chunk = max(1, len(specs) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_round, specs, chunksize=chunk))


def aggregate(r: float, order: OrderKind, n_uavs: int, n_tasks: int,
              outcomes: Sequence[RoundOutcome]) -> ExperimentResult:
    if not outcomes:
        raise ValueError("cannot aggregate zero rounds")
    totals = np.array([o.final_total_utility for o in outcomes])
    mean = float(totals.mean())
    std = float(totals.std(ddof=1)) if len(totals) > 1 else 0.0
    return ExperimentResult(
        r=r, order=order, n_uavs=n_uavs, n_tasks=n_tasks, rounds=len(outcomes),
        mean_total_utility=mean, std_total_utility=std,
        mean_per_task_utility=mean / n_tasks, mean_per_uav_utility=mean / n_uavs,
        mean_iterations=float(np.mean([o.n_iterations for o in outcomes])),
        convergence_rate=sum(o.converged for o in outcomes) / len(outcomes),
    )


@dataclass(frozen=True)
class ExperimentPlan:
    """A grid of groups ``(r, order, n_uavs, n_tasks)`` with a shared round count."""

    sizes: tuple[tuple[int, int], ...]
    r_values: tuple[float, ...]
    orders: tuple[OrderKind, ...] = ALL_ORDERS
    rounds: int = DEFAULT_ROUNDS
    seed: int = 0
    gate: Gate = Gate.OFF
    xi_range: tuple[float, float] = (1.0, 1.5)
    max_iterations: int | None = None
    curves: bool = False

    def __post_init__(self):
        if not self.sizes or not self.r_values or not self.orders:
            raise ValueError("experiment grid is empty")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        for n, m in self.sizes:
            if not 1 <= m <= n:
                raise ValueError(f"invalid size pair N={n}, M={m}: need 1 <= M <= N")

    def groups(self):
        for r, order, (n, m) in product(self.r_values, self.orders, self.sizes):
            yield r, order, n, m

    def round_specs(self, r: float, order: OrderKind, n: int, m: int) -> list[RoundSpec]:
        # only the marginal order uses the admissibility gate
        gate = self.gate if order is OrderKind.MARGINAL else Gate.OFF
        specs = []
        for k in range(self.rounds):
            sseed, dseed = round_seeds(self.seed, n, m, k)
            specs.append(RoundSpec(n, m, r, order, gate, sseed, dseed, self.xi_range,
                                   self.max_iterations, self.curves))
        return specs


def run_plan(plan: ExperimentPlan, workers: int | None = None
             ) -> tuple[list[ExperimentResult], dict[tuple, list[RoundOutcome]]]:
    """Run every group; returns the aggregated rows and the raw outcomes per group."""
    groups = list(plan.groups())
    specs: list[RoundSpec] = []
    for g in groups:
        specs.extend(plan.round_specs(*g))
    outcomes = run_rounds(specs, workers)
    raw: dict[tuple, list[RoundOutcome]] = {}
    rows = []
    for i, g in enumerate(groups):
        chunk = outcomes[i * plan.rounds:(i + 1) * plan.rounds]
        raw[g] = chunk
        rows.append(aggregate(g[0], g[1], g[2], g[3], chunk))
    return rows, raw


def mean_curves(raw: dict[tuple, list[RoundOutcome]]) -> dict[OrderKind, list[float]]:
    """Average total-utility-vs-iteration curves per order.

    Runs that stop early hold their final value, and all curves are padded to
    the longest run across every order so they share an iteration axis.
    """
    by_order: dict[OrderKind, list[tuple[float, ...]]] = {}
    for (r, order, n, m), outs in raw.items():
        by_order.setdefault(order, []).extend(o.curve for o in outs)
    length = max(len(c) for cs in by_order.values() for c in cs)
    result = {}
    for order, cs in by_order.items():
        padded = np.array([list(c) + [c[-1]] * (length - len(c)) for c in cs])
        result[order] = padded.mean(axis=0).tolist()
    return result


def results_csv(rows: Iterable[ExperimentResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for row in rows:
        w.writerow(row.row())
    return buf.getvalue()


def curves_csv(curves: dict[OrderKind, list[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for order in ALL_ORDERS:
        if order in curves:
            for it, v in enumerate(curves[order]):
                w.writerow([order.value, it, repr(v)])
    return buf.getvalue()


def _r_range(lo: float, hi: float, step: float) -> tuple[float, ...]:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 12) for k in range(n))


FIG3_SIZES = ((20, 15), (15, 10), (10, 5))
FIG3_R = _r_range(0.004, 0.010, 0.001)
SWEEP_R = (0.006, 0.01)
SWEEP_RANGE = tuple(range(4, 21))
PRESETS = ("fig3", "fig4", "fig5", "fig6")


def preset(name: str, *, rounds: int = DEFAULT_ROUNDS, seed: int = 0, gate: Gate = Gate.OFF,
           uavs: int | None = None, tasks: int | None = None,
           uavs_grid: Sequence[int] | None = None, tasks_grid: Sequence[int] | None = None,
           r_grid: Sequence[float] | None = None, orders: Sequence[OrderKind] | None = None,
           xi_range: tuple[float, float] = (1.0, 1.5), max_iterations: int | None = None) -> ExperimentPlan:
    """Plan for one of the figure presets, with optional grid overrides.

    ``fig4``/``fig5`` sweep the task count at a fixed UAV count (``uavs``,
    default 20) and the UAV count at a fixed task count (``tasks``, default 4).
    """
    common = dict(rounds=rounds, seed=seed, gate=gate, xi_range=xi_range, max_iterations=max_iterations,
                  orders=tuple(orders) if orders else ALL_ORDERS)
    if name == "fig3":
        if uavs_grid or tasks_grid:
            sizes = _pairs(uavs_grid or [n for n, _ in FIG3_SIZES], tasks_grid or [m for _, m in FIG3_SIZES])
        else:
            sizes = FIG3_SIZES
        return ExperimentPlan(sizes=sizes, r_values=tuple(r_grid or FIG3_R), **common)
    if name in ("fig4", "fig5"):
        n_fixed = uavs if uavs is not None else 20
        m_fixed = tasks if tasks is not None else 4
        sizes = [(n_fixed, m) for m in (tasks_grid or SWEEP_RANGE) if m <= n_fixed]
        sizes += [(n, m_fixed) for n in (uavs_grid or SWEEP_RANGE) if n >= m_fixed]
        return ExperimentPlan(sizes=tuple(dict.fromkeys(sizes)), r_values=tuple(r_grid or SWEEP_R), **common)
    if name == "fig6":
        n = uavs if uavs is not None else 10
        m = tasks if tasks is not None else 5
        return ExperimentPlan(sizes=((n, m),), r_values=tuple(r_grid or (0.006,)), curves=True, **common)
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


def grid_plan(uavs_grid: Sequence[int], tasks_grid: Sequence[int], r_grid: Sequence[float], **kwargs
              ) -> ExperimentPlan:
    """Plan over the cartesian product of explicit grids (pairs with M > N dropped)."""
    return ExperimentPlan(sizes=_pairs(uavs_grid, tasks_grid), r_values=tuple(r_grid), **kwargs)


def _pairs(uavs_grid, tasks_grid):
    return tuple((n, m) for n in uavs_grid for m in tasks_grid if m <= n)
