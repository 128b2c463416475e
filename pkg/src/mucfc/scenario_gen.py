"""Seeded random scenarios over the simulation parameter ranges.

Draw order is fixed: for each task ``(value, xi, max_capacity, threshold)``,
then the ``N x M`` efficiency matrix row by row (UAV-major).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import Scenario, TaskSpec, UavSpec, threshold_lower_bound

__all__ = ["GenConfig", "GenerationError", "generate", "THRESHOLD_FLOOR_FRACTION"]

# thresholds are drawn from the upper part of [0, p): at least this fraction of p
THRESHOLD_FLOOR_FRACTION = 0.5


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    n_uavs: int
    n_tasks: int
    r: float = 0.006
    xi_range: tuple[float, float] = (1.0, 1.5)
    value_range: tuple[float, float] = (5.0, 10.0)
    p_range: tuple[float, float] = (5.0, 6.0)
    efficiency_spread: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_uavs <= 64:
            raise ValueError(f"n_uavs must be in [1, 64], got {self.n_uavs}")
        if not 1 <= self.n_tasks <= self.n_uavs:
            raise ValueError(f"n_tasks must be in [1, n_uavs], got {self.n_tasks}")
        if not self.r > 0:
            raise ValueError("r must be positive")
        for name in ("xi_range", "value_range", "p_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ValueError(f"{name} must satisfy 0 < low <= high, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if not 0 < self.efficiency_spread < 1:
            raise ValueError("efficiency_spread must lie in (0, 1) to keep efficiencies positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["xi_range"] = list(self.xi_range)
        d["value_range"] = list(self.value_range)
        d["p_range"] = list(self.p_range)
        d["threshold_floor_fraction"] = THRESHOLD_FLOOR_FRACTION
        return d


def generate(config: GenConfig) -> Scenario:
    """Build a random `Scenario`; identical configs give identical scenarios."""
    rng = np.random.default_rng(config.seed)
    n, m = config.n_uavs, config.n_tasks
    tasks = []
    for i in range(m):
        value = float(rng.uniform(*config.value_range))
        xi = float(rng.uniform(*config.xi_range))
        p = float(rng.uniform(*config.p_range))
        workload = xi * value
        alpha = config.r * value
        low = max(threshold_lower_bound(value, workload, p, alpha), THRESHOLD_FLOOR_FRACTION * p)
        if low >= p:
            raise GenerationError(f"task {i}: empty threshold range [{low:.6g}, {p:.6g})")
        beta = float(rng.uniform(low, p))
        if beta >= p:  # rounding at the open end
            beta = float(np.nextafter(p, 0.0))
        tasks.append(TaskSpec(i, value, workload, p, beta, alpha))

    centers = np.array([t.threshold * m / n for t in tasks])
    s = config.efficiency_spread
    eff = rng.uniform(centers * (1 - s), centers * (1 + s), size=(n, m))
    uavs = [UavSpec(j, tuple(float(x) for x in eff[j])) for j in range(n)]
    return Scenario(tuple(tasks), tuple(uavs), config.seed, {"generator": config.to_dict()})
