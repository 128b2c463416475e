"""Exact Shapley-value division of a coalition's utility among its members."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Assignment, Scenario, TaskSpec

__all__ = [
    "MAX_COALITION_SIZE",
    "CoalitionTooLarge",
    "AllocationResult",
    "ShapleyCache",
    "subset_table",
    "shapley_from_table",
    "shapley_shares",
    "shapley_allocate",
    "uav_utility",
]

MAX_COALITION_SIZE = 22


class CoalitionTooLarge(RuntimeError):
    """Exact enumeration would need more than ``2**cap`` subset utilities."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"coalition of size {size} exceeds the Shapley enumeration cap of {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class AllocationResult:
    task_id: int
    shares: dict[int, float]

    @property
    def total(self) -> float:
        return sum(self.shares.values())


def subset_table(task: TaskSpec, efficiencies: Sequence[float]) -> np.ndarray:
    """Utility of every sub-coalition, indexed by member bitmask.

    Bit ``b`` of the index selects ``efficiencies[b]``. Capacities are
    accumulated lowest member first, matching `model.coalition_utility`.
    """
    k = len(efficiencies)
    size = 1 << k
    cap = np.zeros(size)
    count = np.zeros(size)
    for b, e in enumerate(efficiencies):
        lo, hi = 1 << b, 1 << (b + 1)
        cap[lo:hi] = cap[:lo] + e
        count[lo:hi] = count[:lo] + 1
    values = np.zeros(size)
    nonempty = count > 0
    e = cap[nonempty]
    V, beta, p = task.value, task.threshold, task.max_capacity
    rev = np.where(e <= beta, V / beta * e,
                   np.where(e < p, V / (beta - p) * (e - p), 0.0))
    values[nonempty] = rev - task.alpha * count[nonempty] * task.workload / e
    return values


def shapley_from_table(values: np.ndarray) -> np.ndarray:
    """Shapley values of a ``k``-player game given ``values[mask]`` for all masks.

    ``values[0]`` is taken as the empty-coalition worth (normally 0).
    """
    size = len(values)
    k = size.bit_length() - 1
    if size != 1 << k:
        raise ValueError("table length must be a power of two")
    if k == 0:
        return np.zeros(0)
    masks = np.arange(size)
    popcount = np.zeros(size, dtype=np.int64)
    for b in range(k):
        popcount += (masks >> b) & 1
    # weight of a subset of size s not containing the player: s!(k-s-1)!/k!
    weights = np.array([1.0 / (k * math.comb(k - 1, s)) for s in range(k)])
    shares = np.empty(k)
    for b in range(k):
        bit = 1 << b
        without = masks[(masks & bit) == 0]
        marginal = values[without | bit] - values[without]
        shares[b] = np.dot(weights[popcount[without]], marginal)
    return shares


def shapley_shares(task: TaskSpec, efficiencies: Sequence[float],
                   max_size: int = MAX_COALITION_SIZE) -> np.ndarray:
    """Shapley share of each member of a coalition with the given efficiencies."""
    k = len(efficiencies)
    if k > max_size:
        raise CoalitionTooLarge(k, max_size)
    if k == 0:
        return np.zeros(0)
    return shapley_from_table(subset_table(task, efficiencies))


class ShapleyCache:
    """Memo of coalition allocations keyed by ``(task_id, members)``.

    Bound to one scenario; safe to reuse across assignments of that scenario.
    """

    def __init__(self, scenario: Scenario, max_size: int = MAX_COALITION_SIZE):
        self.scenario = scenario
        self.max_size = max_size
        self._memo: dict[tuple[int, tuple[int, ...]], dict[int, float]] = {}

    def shares(self, task_id: int, members: tuple[int, ...]) -> dict[int, float]:
        key = (task_id, members)
        got = self._memo.get(key)
        if got is None:
            effs = [self.scenario.uavs[j].efficiency[task_id] for j in members]
            vals = shapley_shares(self.scenario.tasks[task_id], effs, self.max_size)
            got = dict(zip(members, vals.tolist()))
            self._memo[key] = got
        return got

    def __len__(self):
        return len(self._memo)


def shapley_allocate(scenario: Scenario, assignment: Assignment, task_id: int,
                     max_size: int = MAX_COALITION_SIZE,
                     cache: ShapleyCache | None = None) -> AllocationResult:
    """Divide the utility of the coalition on ``task_id`` by Shapley value.

    An empty coalition yields an empty share map. Raises `CoalitionTooLarge`
    for coalitions bigger than ``max_size``.
    """
    if not 0 <= task_id < scenario.n_tasks:
        raise IndexError(f"task {task_id} out of range")
    members = assignment.coalition(task_id)
    if cache is not None:
        if len(members) > max_size:
            raise CoalitionTooLarge(len(members), max_size)
        return AllocationResult(task_id, dict(cache.shares(task_id, members)))
    effs = [scenario.uavs[j].efficiency[task_id] for j in members]
    vals = shapley_shares(scenario.tasks[task_id], effs, max_size)
    return AllocationResult(task_id, dict(zip(members, vals.tolist())))


def uav_utility(scenario: Scenario, assignment: Assignment, uav_id: int,
                cache: ShapleyCache | None = None) -> float:
    """Shapley share of ``uav_id`` in its current coalition."""
    task_id = assignment[uav_id]
    return shapley_allocate(scenario, assignment, task_id, cache=cache).shares[uav_id]
