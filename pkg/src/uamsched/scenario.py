"""Scenario files: JSON schema, load/save, hashing, and seeded generation.

A scenario file is a flat JSON object mirroring ScenarioConfig plus the world
arrays (vertiports, eVTOL failure probabilities, demand matrix, route
adjacency, closure probabilities, high-demand set) and the episode seed.
The schema is published at docs/scenario_schema.json; unknown fields are
rejected on load.

Generation fixes the world geometry from a master seed and varies only the
per-scenario episode seed, so "seen" and "unseen" scenario sets share one
city but never share a seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema
import numpy as np

from .model import (
    MAX_CLOSURE_PROB,
    MAX_FAIL_PROB,
    DemandModel,
    RouteNetwork,
    Scenario,
    ScenarioConfig,
    Vertiport,
)

SCHEMA_VERSION = 1

# Seed-derivation namespaces (SeedSequence spawn keys).
_STREAM_WORLD = 101
_STREAM_EPISODE = {"seen": 0, "unseen": 1}

_NUM = {"type": "number"}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUM}}

SCENARIO_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uamsched scenario",
    "type": "object",
    "additionalProperties": False,
    "required": [
        "schema_version", "name", "seed",
        "n_vertiports", "n_evtols", "area_side", "seat_capacity",
        "park_capacity", "charge_capacity", "base_fare", "elec_price",
        "op_cost_per_mile", "cruise_speed", "battery_max", "energy_per_mile",
        "charge_rate", "wait_time", "t_start", "t_end",
        "corridor_separation", "max_takeoff_delay",
        "peak1", "peak2", "peak_multiplier",
        "vertiports", "evtols", "base_demand", "adjacency",
        "closure_prob", "high_demand",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "n_vertiports": {"type": "integer", "minimum": 2},
        "n_evtols": {"type": "integer", "minimum": 1},
        "area_side": _NUM,
        "seat_capacity": {"type": "integer", "minimum": 1},
        "park_capacity": {"type": "integer", "minimum": 1},
        "charge_capacity": {"type": "integer", "minimum": 0},
        "base_fare": _NUM,
        "elec_price": _NUM,
        "op_cost_per_mile": _NUM,
        "cruise_speed": _NUM,
        "battery_max": _NUM,
        "energy_per_mile": _NUM,
        "charge_rate": _NUM,
        "wait_time": _NUM,
        "t_start": _NUM,
        "t_end": _NUM,
        "corridor_separation": _NUM,
        "max_takeoff_delay": _NUM,
        "peak1": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "peak2": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "peak_multiplier": _NUM,
        "vertiports": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "x", "y", "is_vertistop",
                             "expected_takeoff_delay", "n_charging_stations"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "x": _NUM,
                    "y": _NUM,
                    "is_vertistop": {"type": "boolean"},
                    "expected_takeoff_delay": _NUM,
                    "n_charging_stations": {"type": "integer", "minimum": 0},
                },
            },
        },
        "evtols": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "p_fail"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "p_fail": _NUM,
                },
            },
        },
        "base_demand": _MATRIX,
        "adjacency": _MATRIX,
        "closure_prob": _MATRIX,
        "high_demand": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    },
}


class ScenarioFormatError(ValueError):
    """A scenario file violates the published schema or its invariants."""


def scenario_to_dict(scenario: Scenario) -> dict:
    cfg = scenario.config
    return {
        "schema_version": SCHEMA_VERSION,
        "name": scenario.name,
        "seed": cfg.seed,
        "n_vertiports": cfg.n_vertiports,
        "n_evtols": cfg.n_evtols,
        "area_side": cfg.area_side,
        "seat_capacity": cfg.seat_capacity,
        "park_capacity": cfg.park_capacity,
        "charge_capacity": cfg.charge_capacity,
        "base_fare": cfg.base_fare,
        "elec_price": cfg.elec_price,
        "op_cost_per_mile": cfg.op_cost_per_mile,
        "cruise_speed": cfg.cruise_speed,
        "battery_max": cfg.battery_max,
        "energy_per_mile": cfg.energy_per_mile,
        "charge_rate": cfg.charge_rate,
        "wait_time": cfg.wait_time,
        "t_start": cfg.t_start,
        "t_end": cfg.t_end,
        "corridor_separation": cfg.corridor_separation,
        "max_takeoff_delay": cfg.max_takeoff_delay,
        "peak1": list(scenario.demand.peak1),
        "peak2": list(scenario.demand.peak2),
        "peak_multiplier": scenario.demand.peak_multiplier,
        "vertiports": [
            {
                "id": vp.id,
                "x": vp.x,
                "y": vp.y,
                "is_vertistop": vp.is_vertistop,
                "expected_takeoff_delay": vp.expected_takeoff_delay,
                "n_charging_stations": vp.n_charging_stations,
            }
            for vp in scenario.vertiports
        ],
        "evtols": [
            {"id": k, "p_fail": p} for k, p in enumerate(scenario.evtol_fail_probs)
        ],
        "base_demand": [list(row) for row in scenario.demand.base_demand],
        "adjacency": [list(row) for row in scenario.routes.adjacency],
        "closure_prob": [list(row) for row in scenario.routes.closure_prob],
        "high_demand": sorted(scenario.demand.high_demand),
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioFormatError(f"scenario schema violation: {exc.message}") from exc

    cfg = ScenarioConfig(
        n_vertiports=data["n_vertiports"],
        n_evtols=data["n_evtols"],
        area_side=data["area_side"],
        seat_capacity=data["seat_capacity"],
        park_capacity=data["park_capacity"],
        charge_capacity=data["charge_capacity"],
        base_fare=data["base_fare"],
        elec_price=data["elec_price"],
        op_cost_per_mile=data["op_cost_per_mile"],
        cruise_speed=data["cruise_speed"],
        battery_max=data["battery_max"],
        energy_per_mile=data["energy_per_mile"],
        charge_rate=data["charge_rate"],
        wait_time=data["wait_time"],
        t_start=data["t_start"],
        t_end=data["t_end"],
        corridor_separation=data["corridor_separation"],
        max_takeoff_delay=data["max_takeoff_delay"],
        seed=data["seed"],
    )
    vertiports = tuple(
        Vertiport(
            id=v["id"],
            x=v["x"],
            y=v["y"],
            is_vertistop=v["is_vertistop"],
            expected_takeoff_delay=v["expected_takeoff_delay"],
            n_charging_stations=v["n_charging_stations"],
        )
        for v in data["vertiports"]
    )
    if [v.id for v in vertiports] != list(range(len(vertiports))):
        raise ScenarioFormatError("vertiport ids must be 0..N-1 in order")
    evtols = data["evtols"]
    if [e["id"] for e in evtols] != list(range(len(evtols))):
        raise ScenarioFormatError("eVTOL ids must be 0..K-1 in order")
    demand = DemandModel(
        base_demand=tuple(tuple(float(q) for q in row) for row in data["base_demand"]),
        high_demand=frozenset(data["high_demand"]),
        peak1=tuple(data["peak1"]),
        peak2=tuple(data["peak2"]),
        peak_multiplier=data["peak_multiplier"],
    )
    routes = RouteNetwork(
        adjacency=tuple(tuple(int(a) for a in row) for row in data["adjacency"]),
        closure_prob=tuple(tuple(float(p) for p in row) for row in data["closure_prob"]),
    )
    try:
        return Scenario(
            config=cfg,
            vertiports=vertiports,
            evtol_fail_probs=tuple(float(e["p_fail"]) for e in evtols),
            demand=demand,
            routes=routes,
            name=data["name"],
        )
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def scenario_hash(data: dict | Scenario) -> str:
    """SHA-256 of the canonical (sorted, compact) scenario JSON."""
    if isinstance(data, Scenario):
        data = scenario_to_dict(data)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_scenario(scenario: Scenario, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")
    return path


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


# -- seeded generation ---------------------------------------------------------


@dataclass(frozen=True)
class GenTemplate:
    """Knobs for world generation on top of ScenarioConfig defaults."""

    config: ScenarioConfig = ScenarioConfig()
    n_vertistops: int = 2
    n_high_demand: int = 2
    demand_low: float = 4.0
    demand_high: float = 12.0
    closure_max: float = MAX_CLOSURE_PROB
    fail_max: float = MAX_FAIL_PROB
    tod_max: float = 6.0


def paper_template() -> GenTemplate:
    """Paper-scale city: 8 vertiports (2 vertistops), 40 eVTOLs."""
    return GenTemplate()


def toy_template() -> GenTemplate:
    """Desk-scale city: 4 vertiports (1 vertistop), 6 eVTOLs, solid demand."""
    return GenTemplate(
        config=ScenarioConfig(n_vertiports=4, n_evtols=6),
        n_vertistops=1,
        n_high_demand=1,
        demand_low=6.0,
        demand_high=14.0,
    )


def build_world(master_seed: int, template: GenTemplate) -> Scenario:
    """Generate the world (geometry, demand, probabilities) from master_seed.

    The returned scenario carries seed == master_seed; per-scenario episode
    seeds are assigned by gen_scenarios.
    """
    tpl = template
    cfg = tpl.config
    n, k = cfg.n_vertiports, cfg.n_evtols
    if not 0 <= tpl.n_vertistops < n:
        raise ValueError("n_vertistops must leave at least one charging vertiport")
    if not 0 <= tpl.n_high_demand <= n:
        raise ValueError("n_high_demand out of range")

    rng = np.random.default_rng(np.random.SeedSequence([master_seed, _STREAM_WORLD]))
    xs = rng.uniform(0.0, cfg.area_side, size=n)
    ys = rng.uniform(0.0, cfg.area_side, size=n)
    tods = rng.uniform(0.0, tpl.tod_max, size=n)
    vertistops = set(rng.choice(n, size=tpl.n_vertistops, replace=False).tolist())
    high = frozenset(rng.choice(n, size=tpl.n_high_demand, replace=False).tolist())

    vertiports = tuple(
        Vertiport(
            id=i,
            x=round(float(xs[i]), 4),
            y=round(float(ys[i]), 4),
            is_vertistop=i in vertistops,
            expected_takeoff_delay=round(float(tods[i]), 4),
            n_charging_stations=0 if i in vertistops else cfg.charge_capacity,
        )
        for i in range(n)
    )

    base = np.round(rng.uniform(tpl.demand_low, tpl.demand_high, size=(n, n)), 2)
    np.fill_diagonal(base, 0.0)

    closure = np.round(rng.uniform(0.0, tpl.closure_max, size=(n, n)), 5)
    closure = np.triu(closure, k=1)
    closure = closure + closure.T

    adjacency = np.ones((n, n), dtype=int)
    np.fill_diagonal(adjacency, 0)

    fail = np.round(rng.uniform(0.0, tpl.fail_max, size=k), 6)

    return Scenario(
        config=replace(cfg, seed=master_seed),
        vertiports=vertiports,
        evtol_fail_probs=tuple(float(p) for p in fail),
        demand=DemandModel(
            base_demand=tuple(tuple(float(q) for q in row) for row in base),
            high_demand=high,
        ),
        routes=RouteNetwork(
            adjacency=tuple(tuple(int(a) for a in row) for row in adjacency),
            closure_prob=tuple(tuple(float(p) for p in row) for row in closure),
        ),
        name=f"world-{master_seed}",
    )


def episode_seed(master_seed: int, split: str, index: int) -> int:
    """Derived per-scenario seed; splits never collide for one master seed."""
    if split not in _STREAM_EPISODE:
        raise ValueError(f"split must be one of {sorted(_STREAM_EPISODE)}")
    seq = np.random.SeedSequence([master_seed, _STREAM_EPISODE[split], index])
    return int(seq.generate_state(2, np.uint32).view(np.uint64)[0])


def gen_scenarios(
    n: int,
    master_seed: int,
    template: GenTemplate,
    out_dir: str | Path,
    split: str = "seen",
) -> list[Path]:
    """Write n scenario files sharing one world, differing only in seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    world = build_world(master_seed, template)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n):
        scen = replace(
            world,
            config=replace(world.config, seed=episode_seed(master_seed, split, i)),
            name=f"{split}-{i:04d}",
        )
        paths.append(save_scenario(scen, out / f"scenario_{split}_{i:04d}.json"))
    return paths
