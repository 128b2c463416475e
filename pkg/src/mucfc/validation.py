"""Randomised self-checks of the model, allocation and dynamics invariants.

Each suite runs independent trials, each seeded from ``(seed, trial)`` so a
failure can be replayed in isolation. Model functions are looked up through
their modules at call time, so a patched implementation is what gets checked.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import allocation, dynamics, model, preferences, scenario_gen
from .model import Assignment, Scenario, TaskSpec, UavSpec

__all__ = [
    "SuiteResult",
    "SUITES",
    "DEFAULT_TRIALS",
    "run_suite",
    "random_task",
    "permutation_shapley",
    "trial_rng",
]


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    passed: int = 0
    failures: list[tuple[str, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, violated: str | None, seed: int) -> None:
        self.total += 1
        if violated is None:
            self.passed += 1
        else:
            self.failures.append((violated, seed))


def trial_rng(seed: int, trial: int) -> tuple[np.random.Generator, int]:
    s = int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])
    return np.random.default_rng(s), s


def random_task(rng: np.random.Generator, task_id: int = 0, coalition_size: int = 1,
                gap: float = 0.0) -> TaskSpec:
    """A task drawn from the simulation ranges with its threshold at or above
    the monotonicity bound for ``coalition_size`` members.

    ``gap`` keeps the threshold at least ``gap * max_capacity`` below the
    maximum capacity.
    """
    value = rng.uniform(5, 10)
    workload = rng.uniform(1.0, 1.5) * value
    p = rng.uniform(5, 6)
    alpha = rng.uniform(0.004, 0.01) * value
    low = model.threshold_lower_bound(value, workload, p, alpha, coalition_size)
    beta = rng.uniform(low, p * (1 - gap))
    return TaskSpec(task_id, value, workload, p, beta, alpha)


def permutation_shapley(task: TaskSpec, efficiencies) -> list[float]:
    """Average marginal contribution over every join order (brute force)."""
    k = len(efficiencies)
    totals = [0.0] * k
    orders = list(itertools.permutations(range(k)))
    for perm in orders:
        cap, size, prev = 0.0, 0, 0.0
        for j in perm:
            cap += efficiencies[j]
            size += 1
            cur = model.revenue(task, cap) - model.loss(task, size, cap)
            totals[j] += cur - prev
            prev = cur
    return [t / len(orders) for t in totals]


def _single_task_scenario(task: TaskSpec, effs) -> tuple[Scenario, Assignment]:
    uavs = tuple(UavSpec(j, (float(e),)) for j, e in enumerate(effs))
    return Scenario((task,), uavs), Assignment((0,) * len(effs))


def suite_revenue(trials: int, seed: int) -> SuiteResult:
    res = SuiteResult("revenue")
    eps = 1e-9
    for t in range(trials):
        rng, s = trial_rng(seed, t)
        # the decaying branch has slope V/(p - beta); a 1e-9 step is only
        # "small" when that gap is not itself microscopic
        task = random_task(rng, gap=0.01)
        below = model.revenue(task, task.threshold - eps)
        above = model.revenue(task, task.threshold + eps)
        violated = None
        if abs(below - above) > 1e-6 * task.value:
            violated = "revenue continuity"
        else:
            peak = model.revenue(task, task.threshold)
            grid = rng.uniform(0, task.max_capacity, size=50)
            if abs(peak - task.value) > 1e-9 * task.value or any(model.revenue(task, e) > peak + 1e-12 for e in grid):
                violated = "revenue peak"
            elif model.revenue(task, 0.0) != 0.0:
                violated = "empty revenue"
        res.record(violated, s)
    return res


def suite_threshold(trials: int, seed: int) -> SuiteResult:
    res = SuiteResult("threshold")
    for t in range(trials):
        rng, s = trial_rng(seed, t)
        size = int(rng.integers(1, 8))
        task = random_task(rng, coalition_size=size)
        res.record(_monotonicity_violation(task, size), s)
    return res


def _monotonicity_violation(task: TaskSpec, size: int, points: int = 200, tol: float = 1e-9) -> str | None:
    def f(e):
        return model.revenue(task, e) - task.alpha * size * task.workload / e

    rising = np.linspace(task.threshold / points, task.threshold, points)
    falling = np.linspace(task.threshold, task.max_capacity, points + 1)[:-1]
    up = [f(e) for e in rising]
    down = [f(e) for e in falling]
    if any(b < a - tol for a, b in zip(up, up[1:])):
        return "utility nondecreasing below threshold"
    if any(b > a + tol for a, b in zip(down, down[1:])):
        return "utility nonincreasing above threshold"
    return None


def suite_motivation(trials: int, seed: int) -> SuiteResult:
    res = SuiteResult("motivation")
    for t in range(trials):
        rng, s = trial_rng(seed, t)
        res.record(_motivation_trial(rng), s)
    return res


def _split(rng, total: float, parts: int) -> list[float]:
    w = rng.uniform(0.5, 1.5, size=parts)
    return (total * w / w.sum()).tolist()


def _motivation_trial(rng) -> str | None:
    task = random_task(rng)
    size = int(rng.integers(1, 6))
    # joining below the threshold
    cap = rng.uniform(0.05, 1.0) * task.threshold
    iv = model.delta1_interval(task, size, cap)
    if iv is not None:
        x = rng.uniform(iv.low, iv.high)
        effs = _split(rng, cap, size) + [x]
        scen = Scenario((task, replace(task, id=1)), tuple(UavSpec(j, (e, 1.0)) for j, e in enumerate(effs)))
        a = Assignment((0,) * size + (1,))
        if not model.join_gain(scen, a, 0, size) > 0:
            return "join gain positive on delta1"
    # leaving above the threshold
    size2 = max(size, 2)
    cap2 = rng.uniform(task.threshold, task.max_capacity)
    iv2 = model.delta2_interval(task, size2, cap2) if cap2 > task.threshold else None
    if iv2 is not None:
        x = rng.uniform(iv2.low, iv2.high)
        if x <= 0:
            return None
        effs = _split(rng, cap2 - x, size2 - 1) + [x]
        scen, a = _single_task_scenario(task, effs)
        if not model.leave_gain(scen, a, 0, size2 - 1) > 0:
            return "leave gain positive on delta2"
    return None


def suite_shapley(trials: int, seed: int) -> SuiteResult:
    res = SuiteResult("shapley")
    for t in range(trials):
        rng, s = trial_rng(seed, t)
        res.record(_shapley_trial(rng), s)
    return res


def _shapley_trial(rng) -> str | None:
    task = random_task(rng)
    k = int(rng.integers(1, 7))
    effs = (rng.uniform(0.3, 1.7, size=k) * task.threshold / k).tolist()
    if k >= 2:
        effs[1] = effs[0]
    scen, a = _single_task_scenario(task, effs)
    shares = allocation.shapley_allocate(scen, a, 0).shares
    if abs(sum(shares.values()) - model.coalition_utility(scen, a, 0)) > 1e-9:
        return "shapley efficiency"
    if k >= 2 and abs(shares[0] - shares[1]) > 1e-12:
        return "shapley symmetry"
    oracle = permutation_shapley(task, effs)
    if any(abs(shares[j] - oracle[j]) > 1e-9 for j in range(k)):
        return "shapley permutation oracle"
    return None


def _random_scenario(rng, max_uavs: int = 10, max_tasks: int = 4) -> Scenario:
    m = int(rng.integers(2, max_tasks + 1))
    n = int(rng.integers(m, max_uavs + 1))
    cfg = scenario_gen.GenConfig(n, m, r=float(rng.uniform(0.004, 0.01)), seed=int(rng.integers(2**32)))
    return scenario_gen.generate(cfg)


def suite_potential(trials: int, seed: int) -> SuiteResult:
    res = SuiteResult("potential")
    for t in range(trials):
        rng, s = trial_rng(seed, t)
        scen = _random_scenario(rng)
        a = dynamics.random_assignment(scen, rng)
        j = int(rng.integers(scen.n_uavs))
        to = int(rng.integers(scen.n_tasks - 1))
        to += to >= a[j]
        ev = preferences.evaluate_switch(scen, a, preferences.OrderKind.MARGINAL, j, to)
        d_phi = dynamics.potential(scen, a.moved(j, to)) - dynamics.potential(scen, a)
        ok = abs((ev.score_candidate - ev.score_current) - d_phi) <= 1e-9
        res.record(None if ok else "exact potential identity", s)
    return res


def suite_stability(trials: int, seed: int) -> SuiteResult:
    res = SuiteResult("stability")
    for t in range(trials):
        rng, s = trial_rng(seed, t)
        scen = _random_scenario(rng, max_uavs=10, max_tasks=5)
        cfg = dynamics.DynamicsConfig(rng_seed=int(rng.integers(2**32)))
        trace = dynamics.run(scen, cfg)
        violated = None
        if not trace.converged:
            violated = "convergence"
        elif not dynamics.is_stable(scen, trace.final_assignment):
            violated = "stability of converged run"
        else:
            phis = [trace.initial_potential] + [r.potential for r in trace.iterations if r.accepted]
            if any(b - a < 1e-12 for a, b in zip(phis, phis[1:])):
                violated = "monotone potential"
            elif dynamics.run(scen, cfg, initial=trace.final_assignment).n_accepted:
                violated = "rerun from converged state"
        res.record(violated, s)
    return res


SUITES: dict[str, Callable[[int, int], SuiteResult]] = {
    "revenue": suite_revenue,
    "threshold": suite_threshold,
    "motivation": suite_motivation,
    "shapley": suite_shapley,
    "potential": suite_potential,
    "stability": suite_stability,
}

DEFAULT_TRIALS = {
    "revenue": 1000,
    "threshold": 100,
    "motivation": 1000,
    "shapley": 500,
    "potential": 200,
    "stability": 50,
}


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    n = DEFAULT_TRIALS[name] if trials is None else trials
    if n < 1:
        raise ValueError("trials must be >= 1")
    return SUITES[name](n, seed)
