"""Economic model of a task-driven UAV coalition.

A coalition ``C_i`` working on task ``i`` has a working capacity equal to the
sum of its members' efficiencies for that task. Its revenue is a tent-shaped
function of capacity that peaks at the task value when capacity equals the
revenue threshold, and it pays a flight cost proportional to the number of
members times the completion time. Coalition utility is revenue minus loss.

All functions here are pure; `Scenario` and `Assignment` are immutable and
"moves" return new objects.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

__all__ = [
    "TaskSpec",
    "UavSpec",
    "Scenario",
    "Assignment",
    "Interval",
    "ScenarioFormatError",
    "capacity",
    "completion_time",
    "loss",
    "revenue",
    "coalition_value",
    "coalition_utility",
    "threshold_lower_bound",
    "join_gain",
    "leave_gain",
    "delta1_interval",
    "delta2_interval",
    "load_scenario",
    "save_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
]


class ScenarioFormatError(ValueError):
    """Raised when a scenario document does not match the file schema."""


def threshold_lower_bound(value: float, workload: float, max_capacity: float, alpha: float,
                          coalition_size: int = 1) -> float:
    """Smallest revenue threshold for which utility tracks revenue monotonically.

    With ``coalition_size=1`` this is the admissible floor for any task. Larger
    coalitions need a larger threshold; pass the actual size to get that bound.
    """
    if min(value, workload, max_capacity, alpha) <= 0:
        raise ValueError("threshold_lower_bound requires positive inputs")
    if coalition_size < 1:
        raise ValueError("coalition_size must be >= 1")
    ratio = 4.0 * value * max_capacity / (alpha * workload * coalition_size)
    return 2.0 * max_capacity / (1.0 + math.sqrt(1.0 + ratio))


@dataclass(frozen=True)
class TaskSpec:
    """Economic parameters of one task.

    ``alpha`` is the flight cost per UAV per unit time charged to a coalition
    working on this task.
    """

    id: int
    value: float
    workload: float
    max_capacity: float
    threshold: float
    alpha: float

    def __post_init__(self):
        for name in ("value", "workload", "max_capacity", "threshold", "alpha"):
            x = getattr(self, name)
            if not (isinstance(x, (int, float)) and math.isfinite(x) and x > 0):
                raise ValueError(f"task {self.id}: {name} must be a positive finite number, got {x!r}")
        if self.threshold >= self.max_capacity:
            raise ValueError(
                f"task {self.id}: threshold {self.threshold} must be below max_capacity {self.max_capacity}")
        lower = self.threshold_floor
        if self.threshold < lower:
            raise ValueError(
                f"task {self.id}: threshold {self.threshold} below admissible lower bound {lower:.6g}")

    @property
    def threshold_floor(self) -> float:
        return threshold_lower_bound(self.value, self.workload, self.max_capacity, self.alpha)


@dataclass(frozen=True)
class UavSpec:
    """Per-task efficiencies of one UAV (work units per unit time)."""

    id: int
    efficiency: tuple[float, ...]

    def __post_init__(self):
        eff = tuple(float(e) for e in self.efficiency)
        for e in eff:
            if not (math.isfinite(e) and e > 0):
                raise ValueError(f"uav {self.id}: efficiencies must be positive and finite, got {e!r}")
        object.__setattr__(self, "efficiency", eff)


@dataclass(frozen=True)
class Scenario:
    """An immutable game instance: M tasks and N >= M UAVs."""

    tasks: tuple[TaskSpec, ...]
    uavs: tuple[UavSpec, ...]
    seed: int = 0
    metadata: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "uavs", tuple(self.uavs))
        if not self.tasks:
            raise ValueError("scenario needs at least one task")
        if len(self.uavs) < len(self.tasks):
            raise ValueError(f"scenario needs N >= M, got N={len(self.uavs)} M={len(self.tasks)}")
        if int(self.seed) < 0:
            raise ValueError("seed must be unsigned")
        for i, t in enumerate(self.tasks):
            if t.id != i:
                raise ValueError(f"task ids must be 0..M-1 in order, position {i} has id {t.id}")
        m = len(self.tasks)
        for j, u in enumerate(self.uavs):
            if u.id != j:
                raise ValueError(f"uav ids must be 0..N-1 in order, position {j} has id {u.id}")
            if len(u.efficiency) != m:
                raise ValueError(f"uav {j}: efficiency vector has length {len(u.efficiency)}, expected {m}")

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_uavs(self) -> int:
        return len(self.uavs)

    def efficiency(self, uav_id: int, task_id: int) -> float:
        return self.uavs[uav_id].efficiency[task_id]


@dataclass(frozen=True)
class Assignment:
    """Strategy profile: ``selection[j]`` is the task chosen by UAV ``j``."""

    selection: tuple[int, ...]

    def __post_init__(self):
        sel = tuple(int(s) for s in self.selection)
        if any(s < 0 for s in sel):
            raise ValueError("task indices must be non-negative")
        object.__setattr__(self, "selection", sel)

    def __len__(self):
        return len(self.selection)

    def __getitem__(self, uav_id: int) -> int:
        return self.selection[uav_id]

    def coalition(self, task_id: int) -> tuple[int, ...]:
        """Members choosing ``task_id``, in increasing UAV order."""
        return tuple(j for j, s in enumerate(self.selection) if s == task_id)

    def coalitions(self, n_tasks: int) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(n_tasks)]
        for j, s in enumerate(self.selection):
            out[s].append(j)
        return [tuple(c) for c in out]

    def moved(self, uav_id: int, task_id: int) -> "Assignment":
        sel = list(self.selection)
        sel[uav_id] = task_id
        return Assignment(tuple(sel))

    def check(self, scenario: Scenario) -> "Assignment":
        if len(self.selection) != scenario.n_uavs:
            raise ValueError(f"assignment has {len(self.selection)} entries, scenario has {scenario.n_uavs} UAVs")
        m = scenario.n_tasks
        bad = [s for s in self.selection if s >= m]
        if bad:
            raise ValueError(f"assignment references task {bad[0]} but scenario has {m} tasks")
        return self


@dataclass(frozen=True)
class Interval:
    """Real interval with an optionally open lower end."""

    low: float
    high: float
    low_open: bool = False

    def __contains__(self, x: float) -> bool:
        above = x > self.low if self.low_open else x >= self.low
        return above and x <= self.high


def capacity(scenario: Scenario, assignment: Assignment, task_id: int) -> float:
    """Working capacity of the coalition on ``task_id`` (0.0 when empty)."""
    _check_task(scenario, task_id)
    return _member_capacity(scenario, assignment.coalition(task_id), task_id)


def completion_time(task: TaskSpec, coalition_capacity: float) -> float:
    if coalition_capacity <= 0:
        raise ValueError("completion time is undefined for zero capacity")
    return task.workload / coalition_capacity


def loss(task: TaskSpec, coalition_size: int, coalition_capacity: float) -> float:
    """Flight cost ``alpha * |C| * Q / e``; zero for an empty coalition."""
    if coalition_size == 0:
        return 0.0
    if coalition_size < 0:
        raise ValueError("coalition_size must be non-negative")
    if coalition_capacity <= 0:
        raise ValueError("a non-empty coalition needs positive capacity")
    return task.alpha * coalition_size * task.workload / coalition_capacity


def revenue(task: TaskSpec, coalition_capacity: float) -> float:
    """Threshold revenue: linear rise to ``value`` at the threshold, then linear
    decay reaching zero at ``max_capacity`` and clamped there."""
    e = coalition_capacity
    if e < 0:
        raise ValueError("capacity must be non-negative")
    if e == 0:
        return 0.0
    if e <= task.threshold:
        return task.value / task.threshold * e
    if e < task.max_capacity:
        return task.value / (task.threshold - task.max_capacity) * (e - task.max_capacity)
    return 0.0


def coalition_value(task: TaskSpec, coalition_size: int, coalition_capacity: float) -> float:
    """Utility of a coalition described by its size and capacity."""
    if coalition_size == 0:
        return 0.0
    return revenue(task, coalition_capacity) - loss(task, coalition_size, coalition_capacity)


def coalition_utility(scenario: Scenario, assignment: Assignment, task_id: int) -> float:
    """Revenue minus loss of the coalition on ``task_id``; 0 when empty."""
    _check_task(scenario, task_id)
    members = assignment.coalition(task_id)
    return coalition_value(scenario.tasks[task_id], len(members),
                           _member_capacity(scenario, members, task_id))


def join_gain(scenario: Scenario, assignment: Assignment, task_id: int, uav_id: int) -> float:
    """Change in the task's coalition utility if ``uav_id`` joins it."""
    if assignment[uav_id] == task_id:
        raise ValueError(f"uav {uav_id} is already a member of coalition {task_id}")
    after = assignment.moved(uav_id, task_id)
    return coalition_utility(scenario, after, task_id) - coalition_utility(scenario, assignment, task_id)


def leave_gain(scenario: Scenario, assignment: Assignment, task_id: int, uav_id: int) -> float:
    """Change in the task's coalition utility if ``uav_id`` leaves it."""
    if assignment[uav_id] != task_id:
        raise ValueError(f"uav {uav_id} is not a member of coalition {task_id}")
    before = coalition_utility(scenario, assignment, task_id)
    members = tuple(j for j in assignment.coalition(task_id) if j != uav_id)
    task = scenario.tasks[task_id]
    after = coalition_value(task, len(members), _member_capacity(scenario, members, task_id))
    return after - before


def delta1_interval(task: TaskSpec, coalition_size: int, coalition_capacity: float) -> Interval | None:
    """Efficiencies for which a joiner strictly raises the coalition's utility
    while keeping capacity at or below the threshold.

    Returns ``None`` when there is no room below the threshold.
    """
    e = coalition_capacity
    if coalition_size < 1 or e <= 0:
        raise ValueError("delta1 needs a non-empty coalition with positive capacity")
    if e > task.threshold:
        raise ValueError("delta1 is undefined above the revenue threshold")
    k = task.value / (task.alpha * task.threshold * task.workload)
    lam = coalition_size / e + k * e
    mu = 4.0 * k
    low = 2.0 / (math.sqrt(lam * lam + mu) + lam)
    high = task.threshold - e
    if high < low or high <= 0:
        return None
    return Interval(low, high)


def delta2_interval(task: TaskSpec, coalition_size: int, coalition_capacity: float) -> Interval | None:
    """Efficiencies for which a departing member strictly raises the coalition's
    utility while capacity stays at or above the threshold.

    Only defined on the decaying revenue branch; returns ``None`` when the
    coalition sits at or beyond ``max_capacity`` or the bound is nonpositive.
    """
    e = coalition_capacity
    if e <= task.threshold:
        raise ValueError("delta2 is undefined at or below the revenue threshold")
    if coalition_size < 1:
        raise ValueError("delta2 needs a non-empty coalition")
    if e >= task.max_capacity:
        return None
    k = task.value / (task.alpha * (task.max_capacity - task.threshold) * task.workload)
    lam = coalition_size / e - k * e
    mu = 4.0 * k
    # positive root of k x^2 + lam x - 1, written to avoid cancellation
    root = 2.0 / (lam + math.sqrt(lam * lam + mu))
    high = min(e - task.threshold, root)
    if high <= 0:
        return None
    return Interval(0.0, high, low_open=True)


def _check_task(scenario: Scenario, task_id: int) -> None:
    if not 0 <= task_id < scenario.n_tasks:
        raise IndexError(f"task {task_id} out of range for {scenario.n_tasks} tasks")


def _member_capacity(scenario: Scenario, members: Iterable[int], task_id: int) -> float:
    # summed in increasing UAV order; allocation builds subset capacities the same way
    total = 0.0
    for j in members:
        total += scenario.uavs[j].efficiency[task_id]
    return total


# --- scenario file format -------------------------------------------------

_TASK_KEYS = ("id", "value", "workload", "max_capacity", "threshold", "alpha")
_UAV_KEYS = ("id", "efficiency")


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "seed": int(scenario.seed),
        "tasks": [{k: getattr(t, k) for k in _TASK_KEYS} for t in scenario.tasks],
        "uavs": [{"id": u.id, "efficiency": list(u.efficiency)} for u in scenario.uavs],
    }
    if "generator" in scenario.metadata:
        doc["generator"] = scenario.metadata["generator"]
    return doc


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    _expect_keys(doc, required={"seed", "tasks", "uavs"}, optional={"generator"}, where="scenario")
    seed = doc["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioFormatError("seed must be an unsigned integer")
    if not isinstance(doc["tasks"], list) or not isinstance(doc["uavs"], list):
        raise ScenarioFormatError("tasks and uavs must be arrays")
    try:
        tasks = []
        for t in doc["tasks"]:
            _expect_keys(t, required=set(_TASK_KEYS), where="task")
            tasks.append(TaskSpec(**{k: t[k] for k in _TASK_KEYS}))
        uavs = []
        for u in doc["uavs"]:
            _expect_keys(u, required=set(_UAV_KEYS), where="uav")
            if not isinstance(u["efficiency"], list):
                raise ScenarioFormatError("uav efficiency must be an array")
            uavs.append(UavSpec(u["id"], tuple(u["efficiency"])))
        meta = {"generator": doc["generator"]} if "generator" in doc else {}
        return Scenario(tuple(tasks), tuple(uavs), seed, meta)
    except ScenarioFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(str(exc)) from exc


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def _expect_keys(obj: Any, required: set[str], optional: Sequence[str] | set[str] = (), where: str = "") -> None:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where} entry must be an object")
    keys = set(obj)
    missing = required - keys
    unknown = keys - required - set(optional)
    if missing:
        raise ScenarioFormatError(f"{where} missing keys: {sorted(missing)}")
    if unknown:
        raise ScenarioFormatError(f"{where} has unknown keys: {sorted(unknown)}")
