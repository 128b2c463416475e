import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mucfc.model import scenario_to_dict, threshold_lower_bound
from mucfc.scenario_gen import THRESHOLD_FLOOR_FRACTION, GenConfig, generate


def check_invariants(scen, cfg):
    assert scen.n_uavs == cfg.n_uavs and scen.n_tasks == cfg.n_tasks
    for t in scen.tasks:
        assert cfg.value_range[0] <= t.value <= cfg.value_range[1]
        assert cfg.p_range[0] <= t.max_capacity <= cfg.p_range[1]
        xi = t.workload / t.value
        assert cfg.xi_range[0] - 1e-12 <= xi <= cfg.xi_range[1] + 1e-12
        assert t.alpha == pytest.approx(cfg.r * t.value, rel=1e-15)
        low = threshold_lower_bound(t.value, t.workload, t.max_capacity, t.alpha)
        assert max(low, THRESHOLD_FLOOR_FRACTION * t.max_capacity) <= t.threshold < t.max_capacity
    for u in scen.uavs:
        assert len(u.efficiency) == cfg.n_tasks
        assert all(e > 0 for e in u.efficiency)


def test_invariants_for_paper_sizes():
    for n, m in [(20, 15), (15, 10), (10, 5), (20, 4), (4, 4)]:
        cfg = GenConfig(n, m, seed=n * 100 + m)
        check_invariants(generate(cfg), cfg)


@settings(max_examples=200, deadline=None)
@given(m=st.integers(1, 8), extra=st.integers(0, 12), r=st.floats(0.001, 0.02),
       seed=st.integers(0, 2**32 - 1))
def test_invariants_hold_for_random_configs(m, extra, r, seed):
    cfg = GenConfig(m + extra, m, r=r, seed=seed)
    check_invariants(generate(cfg), cfg)


def test_many_configs_keep_invariants():
    rng = np.random.default_rng(4)
    for _ in range(10_000):
        m = int(rng.integers(1, 6))
        n = int(rng.integers(m, 9))
        cfg = GenConfig(n, m, r=float(rng.uniform(0.004, 0.01)), seed=int(rng.integers(2**32)))
        scen = generate(cfg)
        for t in scen.tasks:
            assert t.threshold < t.max_capacity


def test_same_seed_same_scenario():
    a = generate(GenConfig(20, 5, seed=42))
    b = generate(GenConfig(20, 5, seed=42))
    assert scenario_to_dict(a) == scenario_to_dict(b)
    assert repr(a) == repr(b)
    assert scenario_to_dict(generate(GenConfig(20, 5, seed=43))) != scenario_to_dict(a)


def test_efficiency_mean_matches_center():
    # efficiencies are centred on threshold * M / N, so N UAVs fill M thresholds on average
    n, m = 50, 40
    ratios = []
    for seed in range(50):
        scen = generate(GenConfig(n, m, seed=seed))
        eff = np.array([u.efficiency for u in scen.uavs])
        centers = np.array([t.threshold * m / n for t in scen.tasks])
        ratios.append(eff / centers)
    ratios = np.concatenate(ratios).ravel()
    assert ratios.size == 100_000
    assert abs(ratios.mean() - 1.0) < 0.01
    assert ratios.min() >= 0.5 and ratios.max() <= 1.5


def test_metadata_records_config():
    cfg = GenConfig(6, 3, r=0.008, seed=9)
    meta = generate(cfg).metadata["generator"]
    assert meta["r"] == 0.008 and meta["seed"] == 9 and meta["n_uavs"] == 6


@pytest.mark.parametrize("kwargs", [dict(n_uavs=3, n_tasks=4), dict(n_uavs=0, n_tasks=0),
                                    dict(n_uavs=4, n_tasks=2, r=0.0), dict(n_uavs=4, n_tasks=2, xi_range=(2, 1)),
                                    dict(n_uavs=4, n_tasks=2, seed=-1)])
def test_bad_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        GenConfig(**kwargs)
