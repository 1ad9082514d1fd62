"""Event-driven episode engine.

An episode advances from one ready-for-takeoff event to the next. At each
event the acting aircraft either waits 15 minutes (charging if a station is
free) or flies to a feasible destination; a flight samples failure, takeoff
delay, and actual passenger demand, books revenue and costs in integer cents,
and holds parking according to reserve-at-decision / release-at-takeoff
semantics. All stochastic draws come from the state's own RNG stream, so a
(scenario, seed, action sequence) triple replays bit-identically.

A SimState is single-threaded but cheaply cloneable: GA fitness rollouts and
experiment sweeps each work on their own clone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import TAKEOFF_DELAY_STD, Scenario, cents

# SeedSequence namespace for the per-episode simulation stream.
_STREAM_SIM = 0

EVENT_KIND = "ready-for-takeoff"


class ConstraintViolation(RuntimeError):
    """An internal consistency check caught a broken operating constraint."""


class InfeasibleActionError(ValueError):
    """A decision was applied that feasible_actions would not permit."""


@dataclass
class Evtol:
    """Mutable per-aircraft state. location == -1 while airborne."""

    id: int
    location: int
    dest: int
    battery: float
    t_flight: float      # takeoff time of the most recent flight
    t_dec: float         # next decision instant (landing time while airborne)
    p_fail: float
    failed: bool = False
    legs: int = 0

    def clone(self) -> "Evtol":
        return replace(self)


@dataclass(frozen=True)
class Event:
    time: float
    evtol_id: int
    kind: str = EVENT_KIND


@dataclass(frozen=True)
class JourneyRecord:
    """One committed flight; everything profit needs, in cents."""

    evtol: int
    leg: int
    v_start: int
    v_end: int
    t_takeoff: float
    t_landing: float
    passengers: int
    fare_cents: int
    r_cents: int
    elec_cents: int
    energy_kwh: float
    delay_min: float
    corridor: int


@dataclass(frozen=True)
class DecisionRecord:
    """One decision (wait, flight, or failed takeoff) as written to replays."""

    event_time: float
    evtol: int
    action: int
    corridor: int | None
    delay: float | None
    passengers: int
    fare_cents: int
    energy_kwh: float


@dataclass
class EpisodeLog:
    decisions: list[DecisionRecord] = field(default_factory=list)
    journeys: list[JourneyRecord] = field(default_factory=list)
    idle_decisions: int = 0
    flight_decisions: int = 0
    revenue_cents: int = 0
    op_cost_cents: int = 0
    elec_cost_cents: int = 0

    @property
    def profit_cents(self) -> int:
        return self.revenue_cents - self.op_cost_cents - self.elec_cost_cents

    def clone(self) -> "EpisodeLog":
        out = EpisodeLog(
            decisions=list(self.decisions),
            journeys=list(self.journeys),
            idle_decisions=self.idle_decisions,
            flight_decisions=self.flight_decisions,
            revenue_cents=self.revenue_cents,
            op_cost_cents=self.op_cost_cents,
            elec_cost_cents=self.elec_cost_cents,
        )
        return out


class SimState:
    """Mutable episode state; construct via init_episode, advance via
    next_event / apply_decision."""

    __slots__ = (
        "scenario", "clock", "evtols", "occupancy", "charge_busy",
        "corridor", "closure_schedule", "demand_pools", "pending_releases",
        "rng", "log",
    )

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.clock: float = scenario.config.t_start
        self.evtols: list[Evtol] = []
        self.occupancy: list[int] = []          # parked + reserved slots per port
        self.charge_busy: list[list[float]] = []  # per-port station busy-until times
        self.corridor: list[float] = []         # flat (i*N + j)*2 + lane
        self.closure_schedule: tuple[frozenset, ...] = ()
        self.demand_pools: dict[tuple[int, int, int], int] = {}
        self.pending_releases: list[tuple[float, int, int]] = []
        self.rng: np.random.Generator = np.random.default_rng()
        self.log = EpisodeLog()

    # -- cloning ---------------------------------------------------------------

    def clone(self) -> "SimState":
        out = SimState.__new__(SimState)
        out.scenario = self.scenario
        out.clock = self.clock
        out.evtols = [e.clone() for e in self.evtols]
        out.occupancy = list(self.occupancy)
        out.charge_busy = [list(b) for b in self.charge_busy]
        out.corridor = list(self.corridor)
        out.closure_schedule = self.closure_schedule
        out.demand_pools = dict(self.demand_pools)
        out.pending_releases = list(self.pending_releases)
        bg = type(self.rng.bit_generator)()
        bg.state = self.rng.bit_generator.state
        out.rng = np.random.Generator(bg)
        out.log = self.log.clone()
        return out

    # -- derived views ----------------------------------------------------------

    def hour_index(self, t: float) -> int:
        """Closure-schedule slot for clock-minute t, clamped to the horizon."""
        cfg = self.scenario.config
        first = int(cfg.t_start // 60)
        slot = int(t // 60) - first
        return min(max(slot, 0), len(self.closure_schedule) - 1)

    def closed_pairs(self) -> frozenset:
        """Unordered vertiport pairs currently closed by weather."""
        return self.closure_schedule[self.hour_index(self.clock)]

    def route_open(self, i: int, j: int) -> bool:
        if self.scenario.routes.adjacency[i][j] == 0:
            return False
        key = (i, j) if i < j else (j, i)
        return key not in self.closed_pairs()

    def charge_free_at(self, port: int) -> float:
        """Earliest time a charging station at `port` is free (t_end if none)."""
        busy = self.charge_busy[port]
        if not busy:
            return self.scenario.config.t_end
        return max(min(busy), self.clock)

    def corridor_times(self, i: int, j: int) -> tuple[float, float]:
        base = (i * self.scenario.n + j) * 2
        return self.corridor[base], self.corridor[base + 1]


def init_episode(scenario: Scenario) -> SimState:
    """Fresh episode: aircraft parked round-robin with full batteries, the
    clock at t_start, and the hourly weather-closure states pre-sampled."""
    cfg = scenario.config
    n, k = cfg.n_vertiports, cfg.n_evtols
    if k > n * cfg.park_capacity:
        raise ValueError(
            f"{k} eVTOLs cannot park across {n} vertiports "
            f"with capacity {cfg.park_capacity}"
        )

    st = SimState(scenario)
    st.rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _STREAM_SIM]))
    st.occupancy = [0] * n
    st.charge_busy = [
        [cfg.t_start] * vp.n_charging_stations for vp in scenario.vertiports
    ]
    st.corridor = [cfg.t_start] * (2 * n * n)

    for kk in range(k):
        port = kk % n
        st.occupancy[port] += 1
        st.evtols.append(
            Evtol(
                id=kk,
                location=port,
                dest=port,
                battery=cfg.battery_max,
                t_flight=cfg.t_start,
                t_dec=cfg.t_start,
                p_fail=scenario.evtol_fail_probs[kk],
                failed=False,
            )
        )

    # One closure state per operating hour, sampled up front so weather does
    # not depend on the action path. Pairs drawn in (hour, i<j) order.
    first = int(cfg.t_start // 60)
    last = math.ceil(cfg.t_end / 60)
    schedule = []
    closure = scenario.routes.closure_prob
    for _ in range(first, last):
        closed = set()
        for i in range(n):
            for j in range(i + 1, n):
                if st.rng.random() < closure[i][j]:
                    closed.add((i, j))
        schedule.append(frozenset(closed))
    st.closure_schedule = tuple(schedule)
    return st


def has_pending(state: SimState) -> bool:
    """True while some active aircraft still has a decision within the horizon."""
    t_end = state.scenario.config.t_end
    return any(not e.failed and e.t_dec <= t_end for e in state.evtols)


def next_event(state: SimState) -> Event | None:
    """Earliest (time, id) decision event, or None at episode end.

    Advances the clock to the event time and settles parking releases that
    fall due on the way; calling it again without applying a decision
    returns the same event.
    """
    t_end = state.scenario.config.t_end
    best: Evtol | None = None
    for e in state.evtols:
        if e.failed or e.t_dec > t_end:
            continue
        if best is None or (e.t_dec, e.id) < (best.t_dec, best.id):
            best = e
    if best is None:
        return None

    state.clock = max(state.clock, best.t_dec)
    _settle_releases(state, state.clock)
    if best.location == -1:
        # The landing materializes with its event; the slot reserved at the
        # flight decision simply becomes the parked slot.
        best.location = best.dest
    return Event(time=best.t_dec, evtol_id=best.id)


def _settle_releases(state: SimState, upto: float) -> None:
    """Free origin parking slots whose takeoffs have occurred by `upto`."""
    if not state.pending_releases:
        return
    due = [r for r in state.pending_releases if r[0] <= upto]
    if not due:
        return
    due.sort()
    state.pending_releases = [r for r in state.pending_releases if r[0] > upto]
    for _, _, port in due:
        state.occupancy[port] -= 1
        if state.occupancy[port] < 0:
            raise ConstraintViolation(f"negative occupancy at vertiport {port}")


def action_feasible(state: SimState, evtol_id: int, dest: int) -> bool:
    """Whether `dest` satisfies the battery / parking / open-route constraints
    for the acting aircraft. Waiting (dest == current) is always feasible."""
    e = state.evtols[evtol_id]
    i = e.location
    if dest == i:
        return True
    if not 0 <= dest < state.scenario.n:
        return False
    if not state.route_open(i, dest):
        return False
    if e.battery <= state.scenario.trip_energy(i, dest):
        return False
    if state.occupancy[dest] >= state.scenario.config.park_capacity:
        return False
    return True


def feasible_actions(state: SimState, evtol_id: int) -> set[int]:
    """All destinations open to the acting aircraft, wait included."""
    e = state.evtols[evtol_id]
    acts = {e.location}
    for j in range(state.scenario.n):
        if j != e.location and action_feasible(state, evtol_id, j):
            acts.add(j)
    return acts


def _demand_pool_draw(state: SimState, i: int, j: int, takeoff: float) -> int:
    """Board passengers from the (i, j, hour-of-takeoff) actual-demand pool."""
    cfg = state.scenario.config
    if not cfg.t_start <= takeoff < cfg.t_end:
        return 0
    hour = int(takeoff // 60)
    key = (i, j, hour)
    pool = state.demand_pools.get(key)
    if pool is None:
        t_rep = max(hour * 60.0, cfg.t_start)
        forecast = state.scenario.demand_forecast(i, j, t_rep)
        pool = int(state.rng.poisson(forecast))
    boarded = min(cfg.seat_capacity, pool)
    state.demand_pools[key] = pool - boarded
    return boarded


def apply_decision(state: SimState, evtol_id: int, dest: int) -> SimState:
    """Commit the acting aircraft's decision and advance its timers.

    Mutates `state` in place (and returns it). Callers must have obtained the
    event via next_event, so the clock equals the aircraft's decision time.
    """
    e = state.evtols[evtol_id]
    cfg = state.scenario.config
    scen = state.scenario
    if e.failed:
        raise InfeasibleActionError(f"eVTOL {evtol_id} is grounded")
    if e.t_dec != state.clock:
        raise InfeasibleActionError(
            f"eVTOL {evtol_id} is not the acting aircraft at clock {state.clock}"
        )
    if not action_feasible(state, evtol_id, dest):
        raise InfeasibleActionError(
            f"destination {dest} infeasible for eVTOL {evtol_id}"
        )

    i = e.location
    if dest == i:
        _apply_wait(state, e)
        return state

    state.log.flight_decisions += 1

    # Failure is resolved before any resource is committed.
    if state.rng.random() < e.p_fail:
        e.failed = True
        state.log.decisions.append(
            DecisionRecord(
                event_time=state.clock, evtol=evtol_id, action=dest,
                corridor=None, delay=None, passengers=0, fare_cents=0,
                energy_kwh=0.0,
            )
        )
        return state

    delay = float(state.rng.normal(scen.vertiports[i].expected_takeoff_delay,
                                   TAKEOFF_DELAY_STD))
    delay = min(max(delay, 0.0), cfg.max_takeoff_delay)

    # Same-direction launches are separated by corridor_separation minutes:
    # a launch raises both lanes of the direction to takeoff + separation.
    base = (i * scen.n + dest) * 2
    lane = 0 if state.corridor[base] <= state.corridor[base + 1] else 1
    takeoff = max(state.clock + delay, state.corridor[base + lane])
    floor = takeoff + cfg.corridor_separation
    state.corridor[base] = max(state.corridor[base], floor)
    state.corridor[base + 1] = max(state.corridor[base + 1], floor)

    passengers = _demand_pool_draw(state, i, dest, takeoff)
    fare_c = scen.fare_cents(i, dest, takeoff)
    r_c = scen.operation_cost_cents(i, dest)
    elec_c = scen.trip_elec_cents(i, dest)
    energy = scen.trip_energy(i, dest)
    landing = takeoff + scen.flight_time(i, dest)

    state.log.revenue_cents += passengers * fare_c
    state.log.op_cost_cents += passengers * r_c
    state.log.elec_cost_cents += elec_c

    e.battery -= energy
    if e.battery < 0 or e.battery > cfg.battery_max:
        raise ConstraintViolation(
            f"battery out of range for eVTOL {evtol_id}: {e.battery:.3f} kWh"
        )

    # Destination slot reserved now; origin slot freed at the takeoff instant.
    state.occupancy[dest] += 1
    if state.occupancy[dest] > cfg.park_capacity:
        raise ConstraintViolation(f"parking overflow at vertiport {dest}")
    state.pending_releases.append((takeoff, evtol_id, i))

    e.legs += 1
    e.location = -1
    e.dest = dest
    e.t_flight = takeoff
    e.t_dec = landing

    state.log.journeys.append(
        JourneyRecord(
            evtol=evtol_id, leg=e.legs, v_start=i, v_end=dest,
            t_takeoff=takeoff, t_landing=landing, passengers=passengers,
            fare_cents=fare_c, r_cents=r_c, elec_cents=elec_c,
            energy_kwh=energy, delay_min=delay, corridor=lane,
        )
    )
    state.log.decisions.append(
        DecisionRecord(
            event_time=state.clock, evtol=evtol_id, action=dest,
            corridor=lane, delay=delay, passengers=passengers,
            fare_cents=fare_c, energy_kwh=energy,
        )
    )
    return state


def _apply_wait(state: SimState, e: Evtol) -> None:
    cfg = state.scenario.config
    port = e.location
    busy = state.charge_busy[port]
    if busy:
        idx = min(range(len(busy)), key=busy.__getitem__)
        if busy[idx] <= state.clock:
            e.battery = min(cfg.battery_max, e.battery + cfg.charge_rate * cfg.wait_time)
            busy[idx] = state.clock + cfg.wait_time
    e.t_dec += cfg.wait_time
    state.log.idle_decisions += 1
    state.log.decisions.append(
        DecisionRecord(
            event_time=state.clock, evtol=e.id, action=port,
            corridor=None, delay=None, passengers=0, fare_cents=0,
            energy_kwh=0.0,
        )
    )


# -- profit accounting -----------------------------------------------------------


def profit_cents(log: EpisodeLog) -> tuple[int, int, int, int]:
    """(revenue, operating cost, electricity cost, profit) recomputed from the
    journey records alone, independent of the running totals."""
    revenue = sum(j.passengers * j.fare_cents for j in log.journeys)
    op_cost = sum(j.passengers * j.r_cents for j in log.journeys)
    elec = sum(j.elec_cents for j in log.journeys)
    return revenue, op_cost, elec, revenue - op_cost - elec


def profit(log: EpisodeLog) -> tuple[float, float, float, float]:
    """Dollar view of profit_cents."""
    rev, op, elec, z = profit_cents(log)
    return rev / 100.0, op / 100.0, elec / 100.0, z / 100.0


def max_possible_profit_cents(scenario: Scenario) -> float:
    """Demand-weighted fare sum over hourly buckets of the horizon, in cents.

    Uses forecast demand (known at episode start); this is the reward
    normalizer, the upper envelope of revenue.
    """
    cfg = scenario.config
    n = scenario.n
    total = 0.0
    hour = int(cfg.t_start // 60)
    while hour * 60 < cfg.t_end:
        t_rep = max(hour * 60.0, cfg.t_start)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                q = scenario.demand_forecast(i, j, t_rep)
                if q > 0:
                    total += q * scenario.fare_cents(i, j, t_rep)
        hour += 1
    return total


def max_possible_profit(scenario: Scenario) -> float:
    return max_possible_profit_cents(scenario) / 100.0


def episode_reward(log: EpisodeLog, scenario: Scenario) -> float:
    """Normalized delayed reward: profit over the maximum possible profit."""
    denom = max_possible_profit_cents(scenario)
    if denom <= 0:
        raise ValueError("max possible profit must be positive to normalize")
    return log.profit_cents / denom
