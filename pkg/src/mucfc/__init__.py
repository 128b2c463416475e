"""Task-driven multi-UAV coalition formation games.

Coalition utility follows a threshold revenue model, is divided among members
by exact Shapley value, and coalitions form through random unilateral moves
under a marginal-utility, selfish or Pareto preference order.
"""
from .allocation import AllocationResult, CoalitionTooLarge, ShapleyCache, shapley_allocate, uav_utility
from .dynamics import DynamicsConfig, Gate, RunTrace, is_stable, potential, run, step
from .estimator import CoalitionFormation
from .model import (Assignment, Interval, Scenario, TaskSpec, UavSpec, capacity, coalition_utility,
                    completion_time, delta1_interval, delta2_interval, join_gain, leave_gain, load_scenario,
                    loss, revenue, save_scenario, threshold_lower_bound)
from .preferences import (OrderKind, SwitchEvaluation, evaluate_switch, marginal_utility_score, pareto_prefers,
                          selfish_score)
from .scenario_gen import GenConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AllocationResult", "Assignment", "CoalitionFormation", "CoalitionTooLarge", "DynamicsConfig", "GenConfig",
    "Gate", "Interval", "OrderKind", "RunTrace", "Scenario", "ShapleyCache", "SwitchEvaluation", "TaskSpec",
    "UavSpec", "capacity", "coalition_utility", "completion_time", "delta1_interval", "delta2_interval",
    "evaluate_switch", "generate", "is_stable", "join_gain", "leave_gain", "load_scenario", "loss",
    "marginal_utility_score", "pareto_prefers", "potential", "revenue", "run", "save_scenario",
    "selfish_score", "shapley_allocate", "step", "threshold_lower_bound", "uav_utility",
]
