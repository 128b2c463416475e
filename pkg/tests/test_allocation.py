import itertools
import math

import numpy as np
import pytest

from mucfc.allocation import (CoalitionTooLarge, ShapleyCache, shapley_allocate, shapley_from_table,
                              shapley_shares, subset_table, uav_utility)
from mucfc.model import Assignment, coalition_utility, coalition_value
from mucfc.validation import random_task

from conftest import make_scenario, make_task


def brute_force_shapley(worth, k):
    """Shapley values by the subset formula with an arbitrary worth function on frozensets."""
    out = []
    for j in range(k):
        others = [i for i in range(k) if i != j]
        total = 0.0
        for s in range(k):
            w = math.factorial(s) * math.factorial(k - s - 1) / math.factorial(k)
            for sub in itertools.combinations(others, s):
                total += w * (worth(frozenset(sub) | {j}) - worth(frozenset(sub)))
        out.append(total)
    return out


def test_singleton_gets_whole_utility(single):
    scen, a = single(4.0)
    res = shapley_allocate(scen, a, 0)
    assert res.shares == {0: pytest.approx(9.7, abs=1e-12)}


def test_symmetric_pair_splits_evenly(single):
    scen, a = single(2.0, 2.0)
    shares = shapley_allocate(scen, a, 0).shares
    assert shares[0] == pytest.approx(4.7, abs=1e-12)
    assert shares[0] == shares[1]


def test_three_members_against_subset_formula(task, single):
    effs = (1.0, 2.0, 2.5)
    scen, a = single(*effs)

    def worth(members):
        cap = sum(effs[i] for i in sorted(members))
        return coalition_value(task, len(members), cap)

    expected = brute_force_shapley(worth, 3)
    got = shapley_allocate(scen, a, 0).shares
    for j in range(3):
        assert got[j] == pytest.approx(expected[j], abs=1e-12)


def test_table_matches_scalar_utility(task):
    effs = [0.7, 1.3, 2.2, 0.4]
    table = subset_table(task, effs)
    for mask in range(16):
        members = [b for b in range(4) if mask >> b & 1]
        cap = 0.0
        for b in members:
            cap += effs[b]
        assert table[mask] == coalition_value(task, len(members), cap)


def test_efficiency_over_random_coalitions():
    rng = np.random.default_rng(7)
    for _ in range(500):
        task = random_task(rng)
        k = int(rng.integers(1, 9))
        effs = (rng.uniform(0.2, 1.8, size=k) * task.threshold / k).tolist()
        scen = make_scenario([[e] for e in effs], [task])
        a = Assignment((0,) * k)
        shares = shapley_allocate(scen, a, 0).shares
        assert abs(sum(shares.values()) - coalition_utility(scen, a, 0)) <= 1e-9


def test_symmetry_for_identical_members():
    rng = np.random.default_rng(11)
    for _ in range(200):
        task = random_task(rng)
        k = int(rng.integers(2, 8))
        effs = rng.uniform(0.3, 2.0, size=k)
        effs[-1] = effs[0]
        shares = shapley_shares(task, effs)
        assert abs(shares[0] - shares[-1]) <= 1e-12


def test_dummy_player_on_table():
    # player 2 adds nothing to any coalition
    base = np.array([0.0, 3.0, 5.0, 9.0])
    table = np.concatenate([base, base])
    shares = shapley_from_table(table)
    assert shares[2] == 0.0
    assert shares[0] + shares[1] == pytest.approx(9.0)


def test_near_dummy_member_gets_near_zero():
    # vanishing cost and efficiency: the member contributes almost nothing
    task = make_task(alpha=1e-15)
    shares = shapley_shares(task, [1.0, 1.5, 1e-6])
    assert abs(shares[2]) < 1e-5


def test_cap_raises():
    task = make_task()
    with pytest.raises(CoalitionTooLarge):
        shapley_shares(task, [0.1] * 5, max_size=4)


def test_empty_coalition_has_no_shares(single):
    scen = make_scenario([[1.0, 1.0], [1.0, 1.0]])
    res = shapley_allocate(scen, Assignment((0, 0)), 1)
    assert res.shares == {} and res.total == 0.0


def test_cache_matches_direct_and_uav_utility():
    scen = make_scenario([[1.0, 2.0], [2.0, 1.0], [3.0, 0.5]])
    a = Assignment((0, 0, 1))
    cache = ShapleyCache(scen)
    for t in range(2):
        assert shapley_allocate(scen, a, t, cache=cache).shares == shapley_allocate(scen, a, t).shares
    assert len(cache) == 2
    assert uav_utility(scen, a, 2) == pytest.approx(coalition_utility(scen, a, 1), abs=1e-12)
