"""Coalition formation by random unilateral improvement.

Each iteration picks a UAV and a different task uniformly at random. Under
the strict gate the proposal is only considered when the UAV would raise the
target coalition's utility by joining and raise its current coalition's
utility by leaving. Admissible proposals are accepted when the preference
order strictly prefers the move.

After ``stall_window`` consecutive rejections an exhaustive scan of all
unilateral deviations decides whether the partition is stable.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO

import numpy as np

from .allocation import ShapleyCache
from .model import Assignment, Scenario, coalition_value, join_gain, leave_gain
from .preferences import OrderKind, evaluate_switch

__all__ = [
    "Gate",
    "DynamicsConfig",
    "TraceRecord",
    "RunTrace",
    "TRACE_HEADER",
    "potential",
    "total_utility",
    "admissible",
    "step",
    "run",
    "is_stable",
    "random_assignment",
    "write_trace_csv",
]

TRACE_HEADER = ("iteration", "uav", "from_task", "to_task", "accepted", "potential", "total_utility")


class Gate(str, enum.Enum):
    STRICT = "strict"
    OFF = "off"

    @classmethod
    def parse(cls, value: "Gate | str") -> "Gate":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown gate {value!r}; expected 'strict' or 'off'") from None


@dataclass(frozen=True)
class DynamicsConfig:
    """Control parameters of one run.

    ``max_iterations`` and ``stall_window`` default to ``50*N*M`` and ``N*M``
    for the scenario at hand when left as ``None``.
    """

    order: OrderKind = OrderKind.MARGINAL
    gate: Gate = Gate.OFF
    max_iterations: int | None = None
    stall_window: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "order", OrderKind.parse(self.order))
        object.__setattr__(self, "gate", Gate.parse(self.gate))
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.stall_window is not None and self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be unsigned")

    def resolved(self, scenario: Scenario) -> "DynamicsConfig":
        nm = scenario.n_uavs * scenario.n_tasks
        return replace(
            self,
            max_iterations=self.max_iterations if self.max_iterations is not None else 50 * nm,
            stall_window=self.stall_window if self.stall_window is not None else max(nm, 1),
        )


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    uav: int
    from_task: int
    to_task: int
    accepted: bool
    potential: float
    total_utility: float


@dataclass
class RunTrace:
    iterations: list[TraceRecord]
    converged: bool
    final_assignment: Assignment
    initial_assignment: Assignment
    initial_potential: float
    initial_total_utility: float
    config: DynamicsConfig | None = field(default=None, repr=False)

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    @property
    def n_accepted(self) -> int:
        return sum(r.accepted for r in self.iterations)

    @property
    def final_potential(self) -> float:
        return self.iterations[-1].potential if self.iterations else self.initial_potential

    @property
    def final_total_utility(self) -> float:
        return self.iterations[-1].total_utility if self.iterations else self.initial_total_utility

    def potential_curve(self) -> list[float]:
        """Potential before the first iteration followed by the value after each one."""
        return [self.initial_potential] + [r.potential for r in self.iterations]


def potential(scenario: Scenario, assignment: Assignment, cache: ShapleyCache | None = None) -> float:
    """Sum of every UAV's Shapley share."""
    cache = cache if cache is not None else ShapleyCache(scenario)
    total = 0.0
    for task_id, members in enumerate(assignment.coalitions(scenario.n_tasks)):
        if members:
            for u in cache.shares(task_id, members).values():
                total += u
    return total


def total_utility(scenario: Scenario, assignment: Assignment) -> float:
    """Sum of coalition utilities over all tasks."""
    total = 0.0
    for task_id, members in enumerate(assignment.coalitions(scenario.n_tasks)):
        cap = 0.0
        for j in members:
            cap += scenario.uavs[j].efficiency[task_id]
        total += coalition_value(scenario.tasks[task_id], len(members), cap)
    return total


def admissible(scenario: Scenario, assignment: Assignment, gate: Gate | str, uav_id: int, to_task: int) -> bool:
    """Whether the gate lets ``uav_id`` propose moving to ``to_task``."""
    if Gate.parse(gate) is Gate.OFF:
        return True
    return (join_gain(scenario, assignment, to_task, uav_id) > 0
            and leave_gain(scenario, assignment, assignment[uav_id], uav_id) > 0)


def random_assignment(scenario: Scenario, rng: np.random.Generator) -> Assignment:
    return Assignment(tuple(int(s) for s in rng.integers(scenario.n_tasks, size=scenario.n_uavs)))


def step(scenario: Scenario, assignment: Assignment, config: DynamicsConfig, rng: np.random.Generator,
         iteration: int = 0, cache: ShapleyCache | None = None) -> tuple[Assignment, TraceRecord]:
    """Make one random proposal and apply it when admissible and preferred."""
    if scenario.n_tasks < 2:
        raise ValueError("a step needs at least two tasks to choose between")
    cache = cache if cache is not None else ShapleyCache(scenario)
    j = int(rng.integers(scenario.n_uavs))
    from_task = assignment[j]
    to_task = int(rng.integers(scenario.n_tasks - 1))
    if to_task >= from_task:
        to_task += 1
    accepted = False
    if admissible(scenario, assignment, config.gate, j, to_task):
        if evaluate_switch(scenario, assignment, config.order, j, to_task, cache).preferred:
            assignment = assignment.moved(j, to_task)
            accepted = True
    record = TraceRecord(iteration, j, from_task, to_task, accepted,
                         potential(scenario, assignment, cache), total_utility(scenario, assignment))
    return assignment, record


def is_stable(scenario: Scenario, assignment: Assignment, order: OrderKind | str = OrderKind.MARGINAL,
              gate: Gate | str = Gate.OFF, cache: ShapleyCache | None = None) -> bool:
    """True when no UAV has an admissible, preferred move to another task."""
    cache = cache if cache is not None else ShapleyCache(scenario)
    order, gate = OrderKind.parse(order), Gate.parse(gate)
    for j in range(scenario.n_uavs):
        for t in range(scenario.n_tasks):
            if t == assignment[j] or not admissible(scenario, assignment, gate, j, t):
                continue
            if evaluate_switch(scenario, assignment, order, j, t, cache).preferred:
                return False
    return True


def run(scenario: Scenario, config: DynamicsConfig, initial: Assignment | None = None,
        cache: ShapleyCache | None = None) -> RunTrace:
    """Iterate `step` until the partition is verified stable or the budget runs out.

    The initial partition is drawn from the run's RNG unless given.
    """
    cfg = config.resolved(scenario)
    cache = cache if cache is not None else ShapleyCache(scenario)
    rng = np.random.default_rng(cfg.rng_seed)
    drawn = random_assignment(scenario, rng)
    assignment = (initial.check(scenario) if initial is not None else drawn)
    start = assignment
    start_phi = potential(scenario, start, cache)
    start_total = total_utility(scenario, start)

    records: list[TraceRecord] = []
    converged = False
    stall = cfg.stall_window  # check stability before the first proposal
    for it in range(cfg.max_iterations):
        if stall >= cfg.stall_window:
            if is_stable(scenario, assignment, cfg.order, cfg.gate, cache):
                converged = True
                break
            stall = 0
        assignment, rec = step(scenario, assignment, cfg, rng, it, cache)
        records.append(rec)
        stall = 0 if rec.accepted else stall + 1
    else:
        converged = is_stable(scenario, assignment, cfg.order, cfg.gate, cache)
    return RunTrace(records, converged, assignment, start, start_phi, start_total, cfg)


def write_trace_csv(trace: RunTrace, dest: str | Path | IO[str]) -> None:
    """Write one CSV row per iteration with the `TRACE_HEADER` columns."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            _write_trace(trace, fh)
    else:
        _write_trace(trace, dest)


def trace_csv_text(trace: RunTrace) -> str:
    buf = io.StringIO()
    _write_trace(trace, buf)
    return buf.getvalue()


def _write_trace(trace: RunTrace, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in trace.iterations:
        w.writerow([r.iteration, r.uav, r.from_task, r.to_task, int(r.accepted),
                    repr(r.potential), repr(r.total_utility)])
