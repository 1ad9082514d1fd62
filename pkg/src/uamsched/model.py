"""Domain types and closed-form economics of the UAM fleet scheduling world.

Everything here is immutable after construction and free of simulation state:
geometry, flight physics (constant cruise speed, linear energy burn), the
demand model with its two rush-hour peaks, and the fare/cost formulas. Money
is handled in integer cents wherever exact accounting matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# Takeoff delays are Gaussian around the vertiport's expected delay with a
# fixed 6-minute standard deviation, clipped into [0, max_takeoff_delay].
TAKEOFF_DELAY_STD = 6.0

# Upper bounds on per-pair route closure and per-aircraft failure probability.
MAX_CLOSURE_PROB = 0.05
MAX_FAIL_PROB = 0.005


def cents(dollars: float) -> int:
    """Round a dollar amount to integer cents (banker's rounding)."""
    return int(round(dollars * 100))


def q_factor(q: float) -> float:
    """Demand-driven fare multiplier max(ln(q/10), 1).

    Natural log; the floor of 1 dominates for q <= 10e (and for q = 0,
    where the log diverges to -inf).
    """
    if q < 0:
        raise ValueError(f"demand must be nonnegative, got {q}")
    if q == 0:
        return 1.0
    return max(math.log(q / 10.0), 1.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Scalar world parameters. Defaults are the paper-scale values."""

    n_vertiports: int = 8
    n_evtols: int = 40
    area_side: float = 50.0            # miles
    seat_capacity: int = 4
    park_capacity: int = 10
    charge_capacity: int = 6
    base_fare: float = 5.0             # dollars
    elec_price: float = 0.2            # dollars/kWh
    op_cost_per_mile: float = 0.64     # dollars/mile, per passenger
    cruise_speed: float = 74.5         # mph
    battery_max: float = 110.0         # kWh
    energy_per_mile: float = 1.0       # kWh/mile
    charge_rate: float = 3.667         # kWh/minute
    wait_time: float = 15.0            # minutes per idle decision
    t_start: float = 360.0             # clock-minutes (6:00 AM)
    t_end: float = 1080.0              # clock-minutes (6:00 PM)
    corridor_separation: float = 2.0   # minutes between same-direction launches
    max_takeoff_delay: float = 30.0    # minutes
    seed: int = 0

    def __post_init__(self) -> None:
        positive = {
            "n_vertiports": self.n_vertiports,
            "n_evtols": self.n_evtols,
            "area_side": self.area_side,
            "park_capacity": self.park_capacity,
            "base_fare": self.base_fare,
            "elec_price": self.elec_price,
            "op_cost_per_mile": self.op_cost_per_mile,
            "cruise_speed": self.cruise_speed,
            "battery_max": self.battery_max,
            "energy_per_mile": self.energy_per_mile,
            "charge_rate": self.charge_rate,
            "wait_time": self.wait_time,
            "corridor_separation": self.corridor_separation,
            "max_takeoff_delay": self.max_takeoff_delay,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.seat_capacity < 1:
            raise ValueError("seat_capacity must be >= 1")
        if self.charge_capacity < 0:
            raise ValueError("charge_capacity must be >= 0")
        if not self.t_start < self.t_end:
            raise ValueError("t_start must precede t_end")
        # Every origin-destination pair must be reachable on one full charge.
        diagonal = self.area_side * math.sqrt(2.0)
        if self.energy_per_mile * diagonal > self.battery_max:
            raise ValueError(
                "map diagonal not reachable on a full battery: "
                f"{self.energy_per_mile * diagonal:.2f} kWh > {self.battery_max} kWh"
            )


@dataclass(frozen=True)
class Vertiport:
    """A landing site; vertistops park aircraft but have no chargers."""

    id: int
    x: float
    y: float
    is_vertistop: bool = False
    expected_takeoff_delay: float = 0.0   # minutes, <= 6
    n_charging_stations: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.expected_takeoff_delay <= 6.0:
            raise ValueError("expected_takeoff_delay must lie in [0, 6] minutes")
        if self.is_vertistop and self.n_charging_stations != 0:
            raise ValueError("a vertistop cannot have charging stations")
        if self.n_charging_stations < 0:
            raise ValueError("n_charging_stations must be >= 0")


@dataclass(frozen=True)
class DemandModel:
    """Hourly passenger demand with two peaks feeding the high-demand set.

    Demand flows into high-demand vertiports during the morning peak and out
    of them during the evening peak; pairs inside the high-demand set run hot
    during both windows. Everything else stays at the base rate.
    """

    base_demand: tuple[tuple[float, ...], ...]
    high_demand: frozenset[int] = frozenset()
    peak1: tuple[float, float] = (480.0, 540.0)    # 8:00-9:00
    peak2: tuple[float, float] = (960.0, 1020.0)   # 16:00-17:00
    peak_multiplier: float = 4.0

    def __post_init__(self) -> None:
        n = len(self.base_demand)
        for i, row in enumerate(self.base_demand):
            if len(row) != n:
                raise ValueError("base_demand must be square")
            for j, q in enumerate(row):
                if q < 0:
                    raise ValueError("base_demand must be nonnegative")
                if i == j and q != 0:
                    raise ValueError("base_demand diagonal must be zero")
        if any(not 0 <= v < n for v in self.high_demand):
            raise ValueError("high_demand indices out of range")
        if self.peak_multiplier <= 0:
            raise ValueError("peak_multiplier must be positive")

    def in_peak1(self, t: float) -> bool:
        return self.peak1[0] <= t < self.peak1[1]

    def in_peak2(self, t: float) -> bool:
        return self.peak2[0] <= t < self.peak2[1]

    def forecast(self, i: int, j: int, t: float) -> float:
        """Forecast demand (passengers/hour) from i to j at clock-minute t."""
        base = self.base_demand[i][j]
        hi = self.high_demand
        boosted = (
            (self.in_peak1(t) and j in hi and i not in hi)
            or (self.in_peak2(t) and i in hi and j not in hi)
            or ((self.in_peak1(t) or self.in_peak2(t)) and i in hi and j in hi)
        )
        return base * self.peak_multiplier if boosted else base


@dataclass(frozen=True)
class RouteNetwork:
    """Static route graph plus per-pair weather-closure probabilities."""

    adjacency: tuple[tuple[int, ...], ...]
    closure_prob: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.adjacency)
        if any(len(row) != n for row in self.adjacency):
            raise ValueError("adjacency must be square")
        if len(self.closure_prob) != n or any(len(r) != n for r in self.closure_prob):
            raise ValueError("closure_prob must match adjacency shape")
        for i in range(n):
            if self.adjacency[i][i] != 0:
                raise ValueError("adjacency diagonal must be zero")
            for j in range(n):
                if self.adjacency[i][j] not in (0, 1):
                    raise ValueError("adjacency entries must be 0/1")
                if self.adjacency[i][j] != self.adjacency[j][i]:
                    raise ValueError("adjacency must be symmetric")
                p = self.closure_prob[i][j]
                if not 0.0 <= p <= MAX_CLOSURE_PROB:
                    raise ValueError(
                        f"closure probability {p} outside [0, {MAX_CLOSURE_PROB}]"
                    )
                if p != self.closure_prob[j][i]:
                    raise ValueError("closure_prob must be symmetric")

    def weighted_adjacency(self) -> np.ndarray:
        """A_v = (1 - P_closure) elementwise-times A, as float64."""
        a = np.asarray(self.adjacency, dtype=np.float64)
        p = np.asarray(self.closure_prob, dtype=np.float64)
        return (1.0 - p) * a


@dataclass(frozen=True)
class Scenario:
    """Complete immutable world description for one family of episodes.

    `evtol_fail_probs[k]` is aircraft k's per-takeoff failure probability.
    Derived tables (distances, energies, per-pair costs) are cached lazily
    and shared by every episode cloned from this scenario.
    """

    config: ScenarioConfig
    vertiports: tuple[Vertiport, ...]
    evtol_fail_probs: tuple[float, ...]
    demand: DemandModel
    routes: RouteNetwork
    name: str = "scenario"

    def __post_init__(self) -> None:
        cfg = self.config
        if len(self.vertiports) != cfg.n_vertiports:
            raise ValueError("vertiport count does not match config")
        if len(self.evtol_fail_probs) != cfg.n_evtols:
            raise ValueError("eVTOL count does not match config")
        if len(self.demand.base_demand) != cfg.n_vertiports:
            raise ValueError("base_demand size does not match config")
        if len(self.routes.adjacency) != cfg.n_vertiports:
            raise ValueError("route network size does not match config")
        for vp in self.vertiports:
            if not (0.0 <= vp.x <= cfg.area_side and 0.0 <= vp.y <= cfg.area_side):
                raise ValueError(f"vertiport {vp.id} outside the service area")
        for p in self.evtol_fail_probs:
            if not 0.0 <= p <= MAX_FAIL_PROB:
                raise ValueError(f"failure probability {p} outside [0, {MAX_FAIL_PROB}]")

    @property
    def n(self) -> int:
        return self.config.n_vertiports

    @property
    def n_evtols(self) -> int:
        return self.config.n_evtols

    # -- geometry and physics -------------------------------------------------

    @cached_property
    def _dist(self) -> tuple[tuple[float, ...], ...]:
        vps = self.vertiports
        return tuple(
            tuple(math.hypot(a.x - b.x, a.y - b.y) for b in vps) for a in vps
        )

    def distance(self, i: int, j: int) -> float:
        """Euclidean distance in miles between vertiports i and j."""
        return self._dist[i][j]

    def flight_time(self, i: int, j: int) -> float:
        """Cruise time in minutes; the wait action (i == j) is not a flight."""
        if i == j:
            raise ValueError("i == j is a wait, not a flight")
        return self._dist[i][j] / self.config.cruise_speed * 60.0

    def trip_energy(self, i: int, j: int) -> float:
        """Battery charge in kWh needed to fly i -> j."""
        if i == j:
            raise ValueError("i == j is a wait, not a flight")
        return self._dist[i][j] * self.config.energy_per_mile

    # -- economics ------------------------------------------------------------

    def operation_cost(self, i: int, j: int) -> float:
        """Per-passenger operating cost in dollars for the i -> j trip."""
        return self._dist[i][j] * self.config.op_cost_per_mile

    def demand_forecast(self, i: int, j: int, t: float) -> float:
        return self.demand.forecast(i, j, t)

    def passenger_fare(self, i: int, j: int, t: float) -> float:
        """Charged price in dollars: base fare plus demand-scaled variable fare."""
        variable = self.operation_cost(i, j) * q_factor(self.demand.forecast(i, j, t))
        return self.config.base_fare + variable

    @cached_property
    def _r_cents(self) -> tuple[tuple[int, ...], ...]:
        n = self.n
        return tuple(
            tuple(cents(self.operation_cost(i, j)) for j in range(n)) for i in range(n)
        )

    @cached_property
    def _elec_cents(self) -> tuple[tuple[int, ...], ...]:
        n = self.n
        price = self.config.elec_price
        return tuple(
            tuple(
                0 if i == j else cents(price * self.trip_energy(i, j))
                for j in range(n)
            )
            for i in range(n)
        )

    def operation_cost_cents(self, i: int, j: int) -> int:
        return self._r_cents[i][j]

    def trip_elec_cents(self, i: int, j: int) -> int:
        """Electricity cost in cents for one i -> j flight."""
        return self._elec_cents[i][j]

    def fare_cents(self, i: int, j: int, t: float) -> int:
        return cents(self.passenger_fare(i, j, t))

    def sample_actual_demand(self, i: int, j: int, t: float, rng: np.random.Generator) -> int:
        """Actual demand Q_act: a Poisson draw around the forecast."""
        return int(rng.poisson(self.demand.forecast(i, j, t)))
