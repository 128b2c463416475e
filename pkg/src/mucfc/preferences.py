"""Preference orders that decide whether a UAV switches coalition.

Three orders are supported:

``MARGINAL``
    The mover scores a coalition by its own Shapley share plus the shares of
    everyone else in the two coalitions it moves between. Score differences
    equal changes in the total utility of all coalitions, which makes the
    game an exact potential game.
``SELFISH``
    The mover compares its own Shapley share only.
``PARETO``
    The mover's share must strictly rise and no member of the abandoned or
    the joined coalition may end up with a lower share than before.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .allocation import ShapleyCache, shapley_allocate
from .model import Assignment, Scenario

__all__ = [
    "OrderKind",
    "SwitchEvaluation",
    "marginal_utility_score",
    "selfish_score",
    "pareto_prefers",
    "evaluate_switch",
]


class OrderKind(str, enum.Enum):
    MARGINAL = "marginal"
    SELFISH = "selfish"
    PARETO = "pareto"

    @classmethod
    def parse(cls, value: "OrderKind | str") -> "OrderKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown preference order {value!r}; expected one of "
                             f"{[o.value for o in cls]}") from None


@dataclass(frozen=True)
class SwitchEvaluation:
    uav_id: int
    from_task: int
    to_task: int
    score_current: float
    score_candidate: float
    preferred: bool


def _shares(scenario, assignment, task_id, cache):
    if cache is not None:
        return cache.shares(task_id, assignment.coalition(task_id))
    return shapley_allocate(scenario, assignment, task_id).shares


def marginal_utility_score(scenario: Scenario, assignment: Assignment, uav_id: int,
                           previous_task: int, cache: ShapleyCache | None = None) -> float:
    """Marginal-utility score of ``uav_id`` in its coalition under ``assignment``.

    ``previous_task`` names the other coalition involved in the move (the one
    the UAV came from, or for the status quo the one it would go to). The
    score is the UAV's own share, plus every other member's share in its
    coalition, plus every member's share in the previous coalition.
    """
    own_task = assignment[uav_id]
    own = _shares(scenario, assignment, own_task, cache)
    u1 = own[uav_id]
    u2 = 0.0
    if previous_task != own_task:
        for f, u in _shares(scenario, assignment, previous_task, cache).items():
            if f != uav_id:
                u2 += u
    u3 = 0.0
    for g, u in own.items():
        if g != uav_id:
            u3 += u
    return u1 + u2 + u3


def selfish_score(scenario: Scenario, assignment: Assignment, uav_id: int,
                  cache: ShapleyCache | None = None) -> float:
    """The UAV's own Shapley share in its coalition under ``assignment``."""
    return _shares(scenario, assignment, assignment[uav_id], cache)[uav_id]


def pareto_prefers(scenario: Scenario, assignment: Assignment, uav_id: int, to_task: int,
                   cache: ShapleyCache | None = None) -> bool:
    from_task = assignment[uav_id]
    if to_task == from_task:
        raise ValueError("to_task must differ from the current task")
    after = assignment.moved(uav_id, to_task)
    old_before = _shares(scenario, assignment, from_task, cache)
    new_before = _shares(scenario, assignment, to_task, cache)
    old_after = _shares(scenario, after, from_task, cache)
    new_after = _shares(scenario, after, to_task, cache)
    if not new_after[uav_id] > old_before[uav_id]:
        return False
    if any(old_after[f] < old_before[f] for f in old_after):
        return False
    return all(new_after[g] >= new_before[g] for g in new_before)


def evaluate_switch(scenario: Scenario, assignment: Assignment, order: OrderKind | str,
                    uav_id: int, to_task: int, cache: ShapleyCache | None = None) -> SwitchEvaluation:
    """Score the status quo against moving ``uav_id`` to ``to_task``."""
    order = OrderKind.parse(order)
    from_task = assignment[uav_id]
    if to_task == from_task:
        raise ValueError("to_task must differ from the current task")
    after = assignment.moved(uav_id, to_task)
    if order is OrderKind.MARGINAL:
        current = marginal_utility_score(scenario, assignment, uav_id, to_task, cache)
        candidate = marginal_utility_score(scenario, after, uav_id, from_task, cache)
        preferred = candidate > current
    else:
        current = selfish_score(scenario, assignment, uav_id, cache)
        candidate = selfish_score(scenario, after, uav_id, cache)
        preferred = candidate > current
        if order is OrderKind.PARETO and preferred:
            preferred = pareto_prefers(scenario, assignment, uav_id, to_task, cache)
    return SwitchEvaluation(uav_id, from_task, to_task, current, candidate, preferred)
