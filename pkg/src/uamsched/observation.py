"""Flat numeric encoding of the decision-time state for external learners.

One layout constant governs both the demonstration files written by the
harness and the observations served by the environment bindings, so recorded
and live observations are comparable bit-for-bit. All blocks are float64;
times are minutes from t_start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import SimState

LAYOUT_VERSION = "uam-obs-1"


@dataclass(frozen=True)
class Observation:
    """Decision-time state snapshot for the acting aircraft.

    Blocks, in flat() order:
      vertiport_features (N,6)  [x, y, parked+reserved, charge-free-in,
                                 expected takeoff delay, vertistop flag]
      evtol_features    (K,6)   [dest x, dest y, battery kWh, last takeoff,
                                 next decision, failure prob]
      vertiport_adjacency (N,N) (1 - P_closure) * A
      evtol_adjacency   (K,K)   fully connected, zero diagonal
      demand            (N,N)   forecast at the current clock
      fare              (N,N)   dollars at the current clock
      cost              (N,N)   per-passenger operating cost, dollars
      corridor          (2*N*N,) safe-launch times, row-major (i, j, lane)
      acting_evtol      scalar
    """

    vertiport_features: np.ndarray
    evtol_features: np.ndarray
    vertiport_adjacency: np.ndarray
    evtol_adjacency: np.ndarray
    demand: np.ndarray
    fare: np.ndarray
    cost: np.ndarray
    corridor: np.ndarray
    acting_evtol: int
    layout: str = LAYOUT_VERSION

    def flat(self) -> np.ndarray:
        """Contiguous float64 vector in the documented block order."""
        return np.concatenate(
            [
                self.vertiport_features.ravel(),
                self.evtol_features.ravel(),
                self.vertiport_adjacency.ravel(),
                self.evtol_adjacency.ravel(),
                self.demand.ravel(),
                self.fare.ravel(),
                self.cost.ravel(),
                self.corridor.ravel(),
                np.asarray([float(self.acting_evtol)]),
            ]
        )


def flat_length(n_vertiports: int, n_evtols: int) -> int:
    n, k = n_vertiports, n_evtols
    return 6 * n + 6 * k + 6 * n * n + k * k + 1


def encode_observation(state: SimState, acting_evtol: int) -> Observation:
    """Snapshot `state` as seen when `acting_evtol` is ready for takeoff."""
    scen = state.scenario
    cfg = scen.config
    n, k = scen.n, scen.n_evtols
    t0 = cfg.t_start

    vert = np.empty((n, 6), dtype=np.float64)
    for i, vp in enumerate(scen.vertiports):
        vert[i] = (
            vp.x,
            vp.y,
            float(state.occupancy[i]),
            state.charge_free_at(i) - t0,
            vp.expected_takeoff_delay,
            1.0 if vp.is_vertistop else 0.0,
        )

    fleet = np.empty((k, 6), dtype=np.float64)
    for e in state.evtols:
        dest = scen.vertiports[e.dest]
        fleet[e.id] = (
            dest.x,
            dest.y,
            e.battery,
            e.t_flight - t0,
            e.t_dec - t0,
            e.p_fail,
        )

    demand = np.empty((n, n), dtype=np.float64)
    fare = np.empty((n, n), dtype=np.float64)
    cost = np.empty((n, n), dtype=np.float64)
    t = state.clock
    for i in range(n):
        for j in range(n):
            if i == j:
                demand[i, j] = 0.0
                fare[i, j] = 0.0
                cost[i, j] = 0.0
            else:
                demand[i, j] = scen.demand_forecast(i, j, t)
                fare[i, j] = scen.fare_cents(i, j, t) / 100.0
                cost[i, j] = scen.operation_cost_cents(i, j) / 100.0

    corridor = np.asarray(state.corridor, dtype=np.float64) - t0

    return Observation(
        vertiport_features=vert,
        evtol_features=fleet,
        vertiport_adjacency=scen.routes.weighted_adjacency(),
        evtol_adjacency=np.ones((k, k), dtype=np.float64) - np.eye(k),
        demand=demand,
        fare=fare,
        cost=cost,
        corridor=corridor,
        acting_evtol=acting_evtol,
    )
