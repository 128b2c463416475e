import pytest

from mucfc.model import Assignment, Scenario, TaskSpec, UavSpec


def make_task(task_id=0, value=10.0, workload=12.0, max_capacity=6.0, threshold=4.0, alpha=0.1):
    return TaskSpec(task_id, value, workload, max_capacity, threshold, alpha)


def make_scenario(effs, tasks=None):
    """Scenario from an efficiency matrix (rows = UAVs); tasks default to the reference task."""
    m = len(effs[0])
    tasks = tasks or [make_task(i) for i in range(m)]
    return Scenario(tuple(tasks), tuple(UavSpec(j, tuple(row)) for j, row in enumerate(effs)))


@pytest.fixture
def task():
    return make_task()


@pytest.fixture
def single(task):
    """Build a one-task scenario whose UAVs all work on that task."""

    def build(*effs):
        scen = Scenario((task,), tuple(UavSpec(j, (e,)) for j, e in enumerate(effs)))
        return scen, Assignment((0,) * len(effs))

    return build
