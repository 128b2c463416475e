"""scikit-learn style front end to the coalition formation dynamics.

Forming coalitions partitions the UAVs, so `CoalitionFormation` behaves like a
clusterer: ``fit`` runs the dynamics and ``labels_`` holds the task chosen by
each UAV. ``X`` is the ``(n_uavs, n_tasks)`` efficiency matrix; task
parameters come from the ``tasks`` argument. A ready `Scenario` may be passed
as ``X`` instead.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .allocation import ShapleyCache
from .dynamics import DynamicsConfig, Gate, RunTrace, run
from .model import Assignment, Scenario, TaskSpec, UavSpec
from .preferences import OrderKind

__all__ = ["CoalitionFormation", "check_scenario", "check_tasks", "check_assignment"]

TASK_COLUMNS = ("value", "workload", "max_capacity", "threshold", "alpha")


def check_tasks(tasks) -> tuple[TaskSpec, ...]:
    """Coerce ``tasks`` to `TaskSpec` objects.

    Accepts a sequence of `TaskSpec`, of mappings with the task fields, or a
    2-D array whose columns are ``TASK_COLUMNS``.
    """
    if tasks is None:
        raise ValueError("task parameters are required when X is an efficiency matrix")
    if isinstance(tasks, np.ndarray) or (len(tasks) and not isinstance(tasks[0], (TaskSpec, dict))):
        arr = check_array(tasks, dtype=np.float64)
        if arr.shape[1] != len(TASK_COLUMNS):
            raise ValueError(f"task array needs {len(TASK_COLUMNS)} columns {TASK_COLUMNS}, got {arr.shape[1]}")
        return tuple(TaskSpec(i, *map(float, row)) for i, row in enumerate(arr))
    out = []
    for i, t in enumerate(tasks):
        if isinstance(t, TaskSpec):
            out.append(t if t.id == i else TaskSpec(i, t.value, t.workload, t.max_capacity, t.threshold, t.alpha))
        else:
            out.append(TaskSpec(i, **{k: float(t[k]) for k in TASK_COLUMNS}))
    return tuple(out)


def check_scenario(X, tasks=None, seed: int = 0) -> Scenario:
    """Return a validated `Scenario` from either a scenario or an efficiency matrix."""
    if isinstance(X, Scenario):
        return X
    eff = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
    if np.any(eff <= 0):
        raise ValueError("efficiencies must be strictly positive")
    specs = check_tasks(tasks)
    if eff.shape[1] != len(specs):
        raise ValueError(f"X has {eff.shape[1]} task columns but {len(specs)} tasks were given")
    uavs = tuple(UavSpec(j, tuple(row.tolist())) for j, row in enumerate(eff))
    return Scenario(specs, uavs, seed)


def check_assignment(assignment, scenario: Scenario) -> Assignment:
    if not isinstance(assignment, Assignment):
        arr = np.asarray(assignment)
        if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("assignment must be a 1-D integer array of task indices")
        assignment = Assignment(tuple(arr.tolist()))
    return assignment.check(scenario)


class CoalitionFormation(ClusterMixin, BaseEstimator):
    """Partition UAVs into task coalitions by improvement dynamics.

    Parameters
    ----------
    order : {"marginal", "selfish", "pareto"}
        Preference order used to accept switches.
    gate : {"off", "strict"}
        ``"strict"`` only considers moves that raise both the joined and the
        left coalition's utility.
    max_iter : int, optional
        Iteration budget; defaults to ``50 * n_uavs * n_tasks``.
    stall_window : int, optional
        Consecutive rejections before an exhaustive stability scan; defaults
        to ``n_uavs * n_tasks``.
    random_state : int
        Seed for the initial partition and the proposal sequence.

    Attributes
    ----------
    labels_ : ndarray of shape (n_uavs,)
        Task chosen by each UAV.
    shares_ : ndarray of shape (n_uavs,)
        Shapley share of each UAV in its final coalition.
    potential_ : float
        Sum of shares, equal to the total coalition utility.
    converged_ : bool
    n_iter_ : int
    trace_ : RunTrace
    scenario_ : Scenario
    """

    def __init__(self, order="marginal", gate="off", max_iter=None, stall_window=None, random_state=0):
        self.order = order
        self.gate = gate
        self.max_iter = max_iter
        self.stall_window = stall_window
        self.random_state = random_state

    def fit(self, X, y=None, tasks=None, init=None):
        scenario = check_scenario(X, tasks)
        config = DynamicsConfig(OrderKind.parse(self.order), Gate.parse(self.gate),
                                self.max_iter, self.stall_window, int(self.random_state or 0))
        initial = check_assignment(init, scenario) if init is not None else None
        cache = ShapleyCache(scenario)
        trace: RunTrace = run(scenario, config, initial, cache)
        final = trace.final_assignment
        shares = np.zeros(scenario.n_uavs)
        for task_id, members in enumerate(final.coalitions(scenario.n_tasks)):
            if members:
                for j, u in cache.shares(task_id, members).items():
                    shares[j] = u
        self.scenario_ = scenario
        self.trace_ = trace
        self.labels_ = np.asarray(final.selection, dtype=np.int64)
        self.shares_ = shares
        self.potential_ = trace.final_potential
        self.converged_ = trace.converged
        self.n_iter_ = trace.n_iterations
        self.n_features_in_ = scenario.n_tasks
        return self

    def fit_predict(self, X, y=None, tasks=None, init=None):
        return self.fit(X, tasks=tasks, init=init).labels_

    def score(self, X=None, y=None):
        """Total coalition utility of the fitted partition."""
        check_is_fitted(self, "labels_")
        return float(self.trace_.final_total_utility)

    def coalitions(self) -> list[list[int]]:
        check_is_fitted(self, "labels_")
        return [np.flatnonzero(self.labels_ == i).tolist() for i in range(self.scenario_.n_tasks)]

    def _more_tags(self):
        return {"non_deterministic": False, "requires_positive_X": True}
