"""Core-model math: geometry, fares, demand, sampling."""

import math

import numpy as np
import pytest

from uamsched.model import ScenarioConfig, cents, q_factor
from uamsched.scenario import build_world, toy_template

from conftest import make_scenario


@pytest.fixture()
def grid():
    # port 0 at origin, port 1 a 3-4-5 triangle away, port 2 at the far corner
    return make_scenario([(0.0, 0.0), (3.0, 4.0), (50.0, 50.0)])


class TestDistance:
    def test_identity(self, grid):
        assert grid.distance(0, 0) == 0.0

    def test_3_4_5(self, grid):
        assert grid.distance(0, 1) == pytest.approx(5.0)

    def test_diagonal(self, grid):
        assert grid.distance(0, 2) == pytest.approx(70.7107, abs=1e-4)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(3)
        coords = [(rng.uniform(0, 50), rng.uniform(0, 50)) for _ in range(6)]
        scen = make_scenario(coords)
        for i in range(6):
            assert scen.distance(i, i) == 0.0
            for j in range(6):
                assert scen.distance(i, j) == scen.distance(j, i)
                assert scen.distance(i, j) >= 0.0
                for k in range(6):
                    assert (
                        scen.distance(i, j)
                        <= scen.distance(i, k) + scen.distance(k, j) + 1e-9
                    )


class TestFlightTime:
    def test_speed_definition(self):
        # 74.5 miles needs a bigger map (and a lighter burn rate to keep the
        # full-charge reachability invariant).
        scen = make_scenario(
            [(0.0, 0.0), (44.7, 59.6)], area_side=100.0, energy_per_mile=0.5
        )
        assert scen.distance(0, 1) == pytest.approx(74.5)
        assert scen.flight_time(0, 1) == pytest.approx(60.0)

    def test_short_hop_tends_to_zero(self):
        scen = make_scenario([(0.0, 0.0), (0.0, 1e-6)])
        assert 0.0 < scen.flight_time(0, 1) < 1e-3

    def test_diagonal(self, grid):
        assert grid.flight_time(0, 2) == pytest.approx(56.95, abs=0.01)

    def test_wait_is_not_a_flight(self, grid):
        with pytest.raises(ValueError):
            grid.flight_time(1, 1)
        with pytest.raises(ValueError):
            grid.trip_energy(1, 1)


class TestTripEnergy:
    def test_linear_default_rate(self):
        scen = make_scenario([(0.0, 0.0), (10.0, 0.0)])
        assert scen.trip_energy(0, 1) == pytest.approx(10.0)

    def test_diagonal_fits_battery(self, grid):
        assert grid.trip_energy(0, 2) == pytest.approx(70.7107, abs=1e-4)
        assert grid.trip_energy(0, 2) <= grid.config.battery_max

    def test_coincident_ports(self):
        scen = make_scenario([(5.0, 5.0), (5.0, 5.0)])
        assert scen.trip_energy(0, 1) == 0.0

    def test_every_generated_pair_reachable(self):
        scen = build_world(11, toy_template())
        for i in range(scen.n):
            for j in range(scen.n):
                if i != j:
                    assert scen.trip_energy(i, j) <= scen.config.battery_max


class TestQFactor:
    def test_floor_at_ten(self):
        assert q_factor(10.0) == 1.0

    def test_log_regime(self):
        assert q_factor(10.0 * math.e**2) == pytest.approx(2.0)

    def test_zero_demand_floors(self):
        assert q_factor(0.0) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            q_factor(-1.0)

    def test_floor_and_monotone(self):
        values = [q_factor(q) for q in np.linspace(0.0, 500.0, 200)]
        assert all(v >= 1.0 for v in values)
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestFareAndCost:
    def test_operation_cost_linear(self):
        scen = make_scenario([(0.0, 0.0), (10.0, 0.0)])
        assert scen.operation_cost(0, 1) == pytest.approx(6.40)
        assert scen.operation_cost(0, 0) == 0.0

    def test_operation_cost_diagonal_corner(self, grid):
        assert cents(grid.operation_cost(0, 2)) == 4525  # $45.25

    def test_fare_floor_factor(self):
        # R = $6.40, Q = 10 -> factor floored at 1
        scen = make_scenario([(0.0, 0.0), (10.0, 0.0)])
        assert scen.passenger_fare(0, 1, 600.0) == pytest.approx(11.40)

    def test_fare_factor_two(self):
        scen = make_scenario(
            [(0.0, 0.0), (10.0, 0.0)],
            base_demand=[[0.0, 10.0 * math.e**2], [10.0, 0.0]],
        )
        assert scen.passenger_fare(0, 1, 600.0) == pytest.approx(17.80)

    def test_zero_distance_fare_is_base(self):
        scen = make_scenario([(5.0, 5.0), (5.0, 5.0)])
        assert scen.passenger_fare(0, 1, 600.0) == pytest.approx(5.0)

    def test_fare_at_least_base_and_monotone_in_distance(self):
        coords = [(0.0, 0.0)] + [(float(d), 0.0) for d in (5, 10, 20, 40)]
        scen = make_scenario(coords)
        fares = [scen.passenger_fare(0, j, 700.0) for j in range(1, 5)]
        assert all(f >= scen.config.base_fare for f in fares)
        assert fares == sorted(fares)


class TestDemandForecast:
    def test_peak_rule(self):
        scen = make_scenario(
            [(0.0, 0.0), (10.0, 0.0)],
            base_demand=[[0.0, 5.0], [5.0, 0.0]],
            high_demand=(1,),
        )
        assert scen.demand_forecast(0, 1, 510.0) == 20.0   # 8:30, into V_B
        assert scen.demand_forecast(0, 1, 720.0) == 5.0    # noon
        assert scen.demand_forecast(1, 0, 510.0) == 5.0    # out of V_B in peak1
        assert scen.demand_forecast(1, 0, 990.0) == 20.0   # 16:30, out of V_B
        assert scen.demand_forecast(0, 0, 510.0) == 0.0

    def test_high_demand_pair_hot_in_both_peaks(self):
        scen = make_scenario(
            [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)],
            base_demand=[[0, 5, 5], [5, 0, 5], [5, 5, 0]],
            high_demand=(0, 1),
        )
        for t in (500.0, 1000.0):
            assert scen.demand_forecast(0, 1, t) == 20.0

    def test_empty_high_demand_set_is_flat(self):
        scen = make_scenario(
            [(0.0, 0.0), (10.0, 0.0)],
            base_demand=[[0.0, 7.5], [3.0, 0.0]],
        )
        for t in np.linspace(360.0, 1079.0, 33):
            assert scen.demand_forecast(0, 1, t) == 7.5
            assert scen.demand_forecast(1, 0, t) == 3.0


class TestActualDemand:
    def test_zero_forecast(self):
        scen = make_scenario(
            [(0.0, 0.0), (10.0, 0.0)], base_demand=[[0.0, 0.0], [0.0, 0.0]]
        )
        rng = np.random.default_rng(0)
        assert scen.sample_actual_demand(0, 1, 600.0, rng) == 0

    def test_deterministic_given_stream(self):
        scen = make_scenario([(0.0, 0.0), (10.0, 0.0)])
        a = [scen.sample_actual_demand(0, 1, 600.0, np.random.default_rng(9))
             for _ in range(5)]
        b = [scen.sample_actual_demand(0, 1, 600.0, np.random.default_rng(9))
             for _ in range(5)]
        assert a == b

    def test_law_of_large_numbers(self):
        scen = make_scenario(
            [(0.0, 0.0), (10.0, 0.0)], base_demand=[[0.0, 5.0], [5.0, 0.0]]
        )
        rng = np.random.default_rng(123)
        draws = [scen.sample_actual_demand(0, 1, 600.0, rng) for _ in range(100_000)]
        assert np.mean(draws) == pytest.approx(5.0, abs=0.05)


class TestConfigValidation:
    def test_defaults_are_paper_values(self):
        cfg = ScenarioConfig()
        assert (cfg.n_vertiports, cfg.n_evtols) == (8, 40)
        assert cfg.seat_capacity == 4
        assert cfg.park_capacity == 10
        assert cfg.charge_capacity == 6
        assert cfg.base_fare == 5.0
        assert cfg.elec_price == 0.2
        assert cfg.battery_max == 110.0
        assert (cfg.t_start, cfg.t_end) == (360.0, 1080.0)

    def test_rejects_unreachable_diagonal(self):
        with pytest.raises(ValueError):
            ScenarioConfig(energy_per_mile=2.0)  # 141 kWh diagonal > 110

    def test_rejects_bad_horizon(self):
        with pytest.raises(ValueError):
            ScenarioConfig(t_start=1080.0, t_end=360.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ScenarioConfig(base_fare=0.0)
