"""Shared scenario builders and the one expensive toy-fleet GA fixture."""

from __future__ import annotations

import pytest

from uamsched.ga import GAParams, receding_horizon_schedule
from uamsched.harness import run_policy_episode
from uamsched.model import DemandModel, RouteNetwork, Scenario, ScenarioConfig, Vertiport
from uamsched.scenario import gen_scenarios, load_scenario, toy_template


def make_scenario(
    coords,
    *,
    n_evtols=1,
    seed=0,
    vertistops=(),
    base_demand=None,
    high_demand=(),
    adjacency=None,
    closure=None,
    fail_probs=None,
    **config_overrides,
):
    """Hand-built scenario for targeted tests."""
    n = len(coords)
    cfg = ScenarioConfig(
        n_vertiports=n, n_evtols=n_evtols, seed=seed, **config_overrides
    )
    if base_demand is None:
        base_demand = [[0.0 if i == j else 10.0 for j in range(n)] for i in range(n)]
    if adjacency is None:
        adjacency = [[0 if i == j else 1 for j in range(n)] for i in range(n)]
    if closure is None:
        closure = [[0.0] * n for _ in range(n)]
    if fail_probs is None:
        fail_probs = [0.0] * n_evtols
    vertiports = tuple(
        Vertiport(
            id=i,
            x=float(x),
            y=float(y),
            is_vertistop=i in vertistops,
            expected_takeoff_delay=0.0,
            n_charging_stations=0 if i in vertistops else cfg.charge_capacity,
        )
        for i, (x, y) in enumerate(coords)
    )
    return Scenario(
        config=cfg,
        vertiports=vertiports,
        evtol_fail_probs=tuple(fail_probs),
        demand=DemandModel(
            base_demand=tuple(tuple(float(q) for q in row) for row in base_demand),
            high_demand=frozenset(high_demand),
        ),
        routes=RouteNetwork(
            adjacency=tuple(tuple(int(a) for a in row) for row in adjacency),
            closure_prob=tuple(tuple(float(p) for p in row) for row in closure),
        ),
        name=f"test-{seed}",
    )


def micro_scenario(seed=0):
    """2 vertiports, 1 aircraft, rich demand: the exhaustive-GA playground."""
    return make_scenario(
        [(10.0, 10.0), (40.0, 40.0)],
        n_evtols=1,
        seed=seed,
        base_demand=[[0.0, 40.0], [40.0, 0.0]],
    )


TOY_MASTER_SEED = 2024
TOY_GA_PARAMS = GAParams(population=30, max_iterations=30)


@pytest.fixture(scope="session")
def toy_scenarios(tmp_path_factory):
    """20 seeded toy scenario files (N=4, 6 eVTOLs) sharing one world."""
    out = tmp_path_factory.mktemp("toy-scenarios")
    paths = gen_scenarios(20, TOY_MASTER_SEED, toy_template(), out)
    return [load_scenario(p) for p in paths]


@pytest.fixture(scope="session")
def toy_runs(toy_scenarios):
    """ga/greedy/random episodes on the 20 toy scenarios, computed once.

    Returns {policy: [(scenario, log_or_result), ...]} where the ga entry
    holds the full ScheduleResult (for generation traces and solver time).
    """
    runs = {"ga": [], "greedy": [], "random": []}
    for scen in toy_scenarios:
        runs["ga"].append((scen, receding_horizon_schedule(scen, TOY_GA_PARAMS)))
        for policy in ("greedy", "random"):
            log, _ = run_policy_episode(scen, policy)
            runs[policy].append((scen, log))
    return runs
