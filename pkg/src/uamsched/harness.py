"""Experiment orchestration: episode drivers, timing, result records,
replay and demonstration files, and paired comparisons.

Every episode is reproducible by `init_episode(scenario)` plus the recorded
action sequence; replay cross-validates each recorded decision against the
re-simulation and fails loudly on the first divergence.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ga import GAParams, ScheduleResult, receding_horizon_schedule
from .model import Scenario
from .observation import LAYOUT_VERSION, encode_observation
from .policies import greedy_policy, random_policy
from .scenario import load_scenario, scenario_from_dict, scenario_hash, scenario_to_dict
from .simulator import (
    ConstraintViolation,
    EpisodeLog,
    SimState,
    apply_decision,
    episode_reward,
    init_episode,
    next_event,
    profit_cents,
)
from .stats import TTestResult, mean_std, paired_t_test

POLICIES = ("ga", "greedy", "random", "replay", "external")

# SeedSequence namespace for policy-owned draws (the random baseline).
_STREAM_POLICY = 1

FILE_FORMAT = 1


class ReplayError(ValueError):
    """Base class for replay/demonstration file problems."""


class HashMismatchError(ReplayError):
    """The scenario recorded in a file does not match the expected one."""


class ReplayFormatError(ReplayError):
    """A replay/demonstration file is malformed (carries the line number)."""


class ReplayMismatchError(ReplayError):
    """Re-simulation diverged from a recorded decision."""


@dataclass(frozen=True)
class EpisodeRecord:
    scenario_id: str
    scenario_hash: str
    policy: str
    profit_cents: int
    reward: float
    idle_decisions: int
    flight_decisions: int
    wall_seconds: float
    error: str | None = None

    @property
    def profit(self) -> float:
        return self.profit_cents / 100.0


@dataclass
class ExperimentResult:
    policy: str
    records: list[EpisodeRecord] = field(default_factory=list)

    def aggregate(self) -> dict:
        ok = [r for r in self.records if r.error is None]
        profits = [r.profit for r in ok]
        mean_p, std_p = mean_std(profits)
        mean_r, _ = mean_std([r.reward for r in ok])
        mean_i, _ = mean_std([float(r.idle_decisions) for r in ok])
        mean_f, _ = mean_std([float(r.flight_decisions) for r in ok])
        return {
            "policy": self.policy,
            "episodes": len(self.records),
            "failures": len(self.records) - len(ok),
            "mean_profit": mean_p,
            "std_profit": std_p,
            "mean_reward": mean_r,
            "mean_idle_decisions": mean_i,
            "mean_flight_decisions": mean_f,
            "total_wall_seconds": sum(r.wall_seconds for r in ok),
        }

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "records": [asdict(r) for r in self.records],
            "aggregate": self.aggregate(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentResult":
        out = cls(policy=data["policy"])
        out.records = [EpisodeRecord(**r) for r in data["records"]]
        return out

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentResult":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        fields = [
            "scenario_id", "policy", "profit", "reward",
            "idle_decisions", "flight_decisions", "wall_seconds", "error",
        ]
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for r in self.records:
                writer.writerow({
                    "scenario_id": r.scenario_id,
                    "policy": r.policy,
                    "profit": f"{r.profit:.2f}",
                    "reward": f"{r.reward:.6f}",
                    "idle_decisions": r.idle_decisions,
                    "flight_decisions": r.flight_decisions,
                    "wall_seconds": f"{r.wall_seconds:.4f}",
                    "error": r.error or "",
                })
        return path


def policy_rng(scenario: Scenario) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([scenario.config.seed, _STREAM_POLICY])
    )


def run_policy_episode(
    scenario: Scenario,
    policy: str,
    ga_params: GAParams | None = None,
    actions: list[int] | None = None,
    on_decision=None,
) -> tuple[EpisodeLog, float]:
    """Run one episode and return (log, decision-seconds).

    Decision-seconds measure only the time spent computing actions (for the
    GA: the batch solves), not simulation bookkeeping. `actions` feeds the
    external policy; `on_decision(state, event, action)` fires pre-commit.
    """
    if policy == "ga":
        result: ScheduleResult = receding_horizon_schedule(
            scenario, ga_params, on_decision=on_decision
        )
        return result.log, result.solver_seconds

    state = init_episode(scenario)
    rng = policy_rng(scenario)
    spent = 0.0
    index = 0
    while (ev := next_event(state)) is not None:
        t0 = time.perf_counter()
        if policy == "random":
            action = random_policy(state, ev.evtol_id, rng)
        elif policy == "greedy":
            action = greedy_policy(state, ev.evtol_id)
        elif policy == "external":
            if actions is None or index >= len(actions):
                raise ValueError("external policy ran out of recorded actions")
            action = actions[index]
        else:
            raise ValueError(f"unknown policy {policy!r}")
        spent += time.perf_counter() - t0
        if on_decision is not None:
            on_decision(state, ev, action)
        apply_decision(state, ev.evtol_id, action)
        index += 1
    return state.log, spent


def _episode_record(scenario: Scenario, scenario_id: str, policy: str,
                    log: EpisodeLog, wall: float) -> EpisodeRecord:
    return EpisodeRecord(
        scenario_id=scenario_id,
        scenario_hash=scenario_hash(scenario),
        policy=policy,
        profit_cents=log.profit_cents,
        reward=episode_reward(log, scenario),
        idle_decisions=log.idle_decisions,
        flight_decisions=log.flight_decisions,
        wall_seconds=wall,
    )


def _run_one(args: tuple) -> EpisodeRecord:
    path, policy, ga_params, input_dir = args
    scenario = load_scenario(path)
    scenario_id = Path(path).stem
    try:
        if policy == "replay":
            rec_path = _match_companion_file(input_dir, scenario, "replay")
            t0 = time.perf_counter()
            log = replay(rec_path)
            wall = time.perf_counter() - t0
        elif policy == "external":
            demo_path = _match_companion_file(input_dir, scenario, "demo")
            demo = read_demo_actions(demo_path)
            log, wall = run_policy_episode(scenario, "external", actions=demo)
        else:
            log, wall = run_policy_episode(scenario, policy, ga_params)
        return _episode_record(scenario, scenario_id, policy, log, wall)
    except (ConstraintViolation, ReplayError, ValueError) as exc:
        return EpisodeRecord(
            scenario_id=scenario_id,
            scenario_hash=scenario_hash(scenario),
            policy=policy,
            profit_cents=0, reward=0.0, idle_decisions=0, flight_decisions=0,
            wall_seconds=0.0, error=f"{type(exc).__name__}: {exc}",
        )


def run_experiment(
    policy: str,
    scenario_paths: list[str | Path],
    ga_params: GAParams | None = None,
    input_dir: str | Path | None = None,
    workers: int = 1,
) -> ExperimentResult:
    """One episode per scenario file; per-scenario failures are recorded and
    the run continues. Records come back ordered by scenario id."""
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    if policy in ("replay", "external") and input_dir is None:
        raise ValueError(f"policy {policy!r} needs input_dir with recorded files")

    jobs = [(str(p), policy, ga_params, str(input_dir) if input_dir else None)
            for p in scenario_paths]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]

    result = ExperimentResult(policy=policy)
    result.records = sorted(records, key=lambda r: r.scenario_id)
    return result


# -- replay files ----------------------------------------------------------------


def write_replay(log: EpisodeLog, scenario: Scenario, path: str | Path,
                 policy: str = "unknown") -> Path:
    """One JSON line per decision, after a header carrying the scenario."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = scenario_to_dict(scenario)
    header = {
        "kind": "replay",
        "format": FILE_FORMAT,
        "scenario_hash": scenario_hash(data),
        "seed": scenario.config.seed,
        "policy": policy,
        "scenario": data,
    }
    with path.open("w") as fh:
        fh.write(json.dumps(header) + "\n")
        for d in log.decisions:
            fh.write(json.dumps({
                "event_time": d.event_time,
                "evtol": d.evtol,
                "action": d.action,
                "corridor": d.corridor,
                "delay": d.delay,
                "passengers": d.passengers,
                "fare": d.fare_cents,
                "energy": d.energy_kwh,
            }) + "\n")
    return path


def _load_header(path: Path, kind: str) -> dict:
    with path.open() as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ReplayFormatError(f"{path}:1: bad header: {exc}") from exc
    if header.get("kind") != kind or "scenario" not in header:
        raise ReplayFormatError(f"{path}:1: not a {kind} file header")
    if scenario_hash(header["scenario"]) != header.get("scenario_hash"):
        raise HashMismatchError(
            f"{path}: embedded scenario does not match recorded hash"
        )
    return header


def replay(path: str | Path, scenario_path: str | Path | None = None) -> EpisodeLog:
    """Deterministically re-execute a replay file, cross-checking every line.

    If `scenario_path` is given it must hash to the recorded scenario hash.
    Returns the re-simulated log (identical to the original by construction).
    """
    path = Path(path)
    header = _load_header(path, "replay")
    if scenario_path is not None:
        data = json.loads(Path(scenario_path).read_text())
        if scenario_hash(data) != header["scenario_hash"]:
            raise HashMismatchError(
                f"{scenario_path} does not match the scenario recorded in {path}"
            )
    scenario = scenario_from_dict(header["scenario"])
    state = init_episode(scenario)

    with path.open() as fh:
        fh.readline()
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                event_time = float(rec["event_time"])
                evtol = int(rec["evtol"])
                action = int(rec["action"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ReplayFormatError(f"{path}:{lineno}: malformed line: {exc}") from exc

            ev = next_event(state)
            if ev is None:
                raise ReplayMismatchError(
                    f"{path}:{lineno}: episode ended before recorded decisions ran out"
                )
            if ev.time != event_time or ev.evtol_id != evtol:
                raise ReplayMismatchError(
                    f"{path}:{lineno}: expected event ({event_time}, {evtol}), "
                    f"simulated ({ev.time}, {ev.evtol_id})"
                )
            apply_decision(state, ev.evtol_id, action)
            got = state.log.decisions[-1]
            recorded = (rec.get("corridor"), rec.get("delay"), rec.get("passengers"),
                        rec.get("fare"), rec.get("energy"))
            resim = (got.corridor, got.delay, got.passengers,
                     got.fare_cents, got.energy_kwh)
            if recorded != resim:
                raise ReplayMismatchError(
                    f"{path}:{lineno}: recorded outcome {recorded} != re-simulated {resim}"
                )

    if next_event(state) is not None:
        raise ReplayMismatchError(f"{path}: recorded decisions end before the episode does")
    return state.log


# -- demonstration files -----------------------------------------------------------


def export_demonstrations(
    policy: str,
    scenario_paths: list[str | Path],
    out_dir: str | Path,
    ga_params: GAParams | None = None,
) -> list[dict]:
    """Write one demonstration JSONL per scenario; returns a manifest.

    Each line embeds the flat observation exactly as the environment bindings
    serve it, plus the committed action, event time, and acting aircraft.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for spath in scenario_paths:
        scenario = load_scenario(spath)
        data = scenario_to_dict(scenario)
        demo_path = out / f"demo_{Path(spath).stem}.jsonl"
        header = {
            "kind": "demo",
            "format": FILE_FORMAT,
            "layout": LAYOUT_VERSION,
            "scenario_hash": scenario_hash(data),
            "seed": scenario.config.seed,
            "policy": policy,
            "scenario": data,
        }
        lines = 0
        with demo_path.open("w") as fh:
            fh.write(json.dumps(header) + "\n")

            def record(state: SimState, ev, action: int) -> None:
                nonlocal lines
                obs = encode_observation(state, ev.evtol_id)
                fh.write(json.dumps({
                    "obs": obs.flat().tolist(),
                    "action": action,
                    "event_time": ev.time,
                    "evtol": ev.evtol_id,
                }) + "\n")
                lines += 1

            log, _ = run_policy_episode(scenario, policy, ga_params,
                                        on_decision=record)
        manifest.append({
            "file": str(demo_path),
            "scenario_id": Path(spath).stem,
            "scenario_hash": header["scenario_hash"],
            "decisions": lines,
            "profit_cents": log.profit_cents,
        })
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_demo_actions(path: str | Path) -> list[int]:
    """Actions only, for driving the `external` policy off a demonstration."""
    path = Path(path)
    _load_header(path, "demo")
    actions = []
    with path.open() as fh:
        fh.readline()
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            try:
                actions.append(int(json.loads(raw)["action"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ReplayFormatError(f"{path}:{lineno}: malformed line: {exc}") from exc
    return actions


def _match_companion_file(input_dir: str | Path, scenario: Scenario,
                          kind: str) -> Path:
    """Find the replay/demo file in input_dir recorded for `scenario`."""
    want = scenario_hash(scenario)
    for candidate in sorted(Path(input_dir).glob("*.jsonl")):
        try:
            header = _load_header(candidate, kind)
        except ReplayError:
            continue
        if header["scenario_hash"] == want:
            return candidate
    raise HashMismatchError(
        f"no {kind} file in {input_dir} matches scenario hash {want[:12]}…"
    )


# -- comparisons ------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    policy_a: str
    policy_b: str
    scenario_ids: tuple[str, ...]
    deltas: tuple[float, ...]          # profit(a) - profit(b), dollars
    a_wins: int
    b_wins: int
    ttest: TTestResult

    def to_dict(self) -> dict:
        return {
            "policy_a": self.policy_a,
            "policy_b": self.policy_b,
            "scenarios": list(self.scenario_ids),
            "deltas": list(self.deltas),
            "a_wins": self.a_wins,
            "b_wins": self.b_wins,
            "t": self.ttest.t,
            "p": self.ttest.p,
            "dof": self.ttest.dof,
            "degenerate": self.ttest.degenerate,
        }


def compare(a: ExperimentResult, b: ExperimentResult) -> Comparison:
    """Per-scenario profit deltas (a - b) with a paired t-test."""
    b_by_id = {r.scenario_id: r for r in b.records if r.error is None}
    ids, deltas = [], []
    for ra in a.records:
        if ra.error is not None:
            continue
        rb = b_by_id.get(ra.scenario_id)
        if rb is None:
            continue
        ids.append(ra.scenario_id)
        deltas.append(ra.profit - rb.profit)
    if len(deltas) < 2:
        raise ValueError("need at least two common scenarios to compare")
    return Comparison(
        policy_a=a.policy,
        policy_b=b.policy,
        scenario_ids=tuple(ids),
        deltas=tuple(deltas),
        a_wins=sum(1 for d in deltas if d > 0),
        b_wins=sum(1 for d in deltas if d < 0),
        ttest=paired_t_test(deltas),
    )


def validate_log(log: EpisodeLog, scenario: Scenario) -> None:
    """Log-level constraint checks: seat capacity, physics, exact accounting."""
    cfg = scenario.config
    for j in log.journeys:
        if j.passengers > cfg.seat_capacity:
            raise ConstraintViolation(f"journey {j} exceeds seat capacity")
        if j.v_start == j.v_end:
            raise ConstraintViolation(f"journey {j} is not a flight")
        if abs(j.energy_kwh - scenario.trip_energy(j.v_start, j.v_end)) > 1e-12:
            raise ConstraintViolation(f"journey {j} energy mismatch")
        expected_landing = j.t_takeoff + scenario.flight_time(j.v_start, j.v_end)
        if abs(j.t_landing - expected_landing) > 1e-9:
            raise ConstraintViolation(f"journey {j} landing-time mismatch")
    rev, op, elec, z = profit_cents(log)
    if (rev, op, elec) != (log.revenue_cents, log.op_cost_cents, log.elec_cost_cents):
        raise ConstraintViolation("running totals diverge from journey records")
    if z != log.profit_cents:
        raise ConstraintViolation("profit identity violated")
