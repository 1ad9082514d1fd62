"""Reference decision policies: uniform-random feasible and myopic greedy.

Both are pure functions of the visible state (plus an explicit RNG for the
random policy) and only ever return members of feasible_actions.
"""

from __future__ import annotations

import numpy as np

from .simulator import SimState, feasible_actions


def random_policy(state: SimState, evtol_id: int, rng: np.random.Generator) -> int:
    """Uniform draw over the feasible destinations (wait included)."""
    actions = sorted(feasible_actions(state, evtol_id))
    return actions[int(rng.integers(len(actions)))]


def greedy_policy(state: SimState, evtol_id: int) -> int:
    """Fly to the destination with the best expected margin, else wait.

    Margin estimate uses forecast demand (actuals are unknown before
    takeoff): min(C, forecast) * (fare - op cost) - electricity. Ties break
    toward the lowest vertiport index; no positive margin means wait.
    """
    scen = state.scenario
    cap = scen.config.seat_capacity
    here = state.evtols[evtol_id].location
    t = state.clock

    best_j = here
    best_margin = 0.0
    for j in sorted(feasible_actions(state, evtol_id)):
        if j == here:
            continue
        pax = min(float(cap), scen.demand_forecast(here, j, t))
        margin = (
            pax * (scen.fare_cents(here, j, t) - scen.operation_cost_cents(here, j))
            - scen.trip_elec_cents(here, j)
        ) / 100.0
        if margin > best_margin:
            best_margin = margin
            best_j = j
    return best_j
