"""Elitist genetic algorithm over batches of upcoming decisions.

A chromosome assigns one destination gene to each of the next `batch_size`
ready-for-takeoff events, in the order those events materialize during the
rollout; infeasible genes are repaired to the wait action. Fitness is the
profit increment of simulating the batch on a clone of the live state.

Common random numbers: every evaluation clone inherits the live state's RNG
snapshot, so all chromosomes in a batch solve face identical stochastic
draws, and committing the winner on the live state realizes exactly the
profit its fitness reported. An episode is therefore reproducible from
(scenario, seed, committed action sequence) alone.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import Scenario
from .simulator import (
    EpisodeLog,
    Event,
    SimState,
    action_feasible,
    apply_decision,
    has_pending,
    init_episode,
    next_event,
)

# SeedSequence namespace for the genetic-operator stream.
_STREAM_GA_OPS = 3

DecisionHook = Callable[[SimState, Event, int], None]


@dataclass(frozen=True)
class GAParams:
    population: int = 100
    max_iterations: int = 100
    mutation_prob: float = 0.1
    elite_ratio: float = 0.01
    crossover_prob: float = 0.5
    batch_size: int = 60

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        for name in ("mutation_prob", "elite_ratio", "crossover_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def elite_count(self) -> int:
        return max(1, math.ceil(self.elite_ratio * self.population))


@dataclass(frozen=True)
class BatchSolution:
    """Best-ever chromosome of one batch solve, with its per-generation trace."""

    chromosome: np.ndarray
    fitness_cents: int
    generation_best: tuple[int, ...]


@dataclass
class ScheduleResult:
    """Committed receding-horizon schedule plus the GA's own compute time."""

    log: EpisodeLog
    solver_seconds: float
    batches: list[BatchSolution] = field(default_factory=list)


def run_chromosome(state: SimState, genes: np.ndarray,
                   on_decision: DecisionHook | None = None) -> int:
    """Simulate the batch on `state` (mutating it); returns the profit delta.

    Genes bind to events chronologically; a gene that fails feasibility is
    repaired to the wait action. Genes beyond episode end are ignored. The
    optional hook sees (state, event, repaired action) before each commit.
    """
    start = state.log.profit_cents
    for gene in genes:
        ev = next_event(state)
        if ev is None:
            break
        dest = int(gene)
        if not action_feasible(state, ev.evtol_id, dest):
            dest = state.evtols[ev.evtol_id].location
        if on_decision is not None:
            on_decision(state, ev, dest)
        apply_decision(state, ev.evtol_id, dest)
    return state.log.profit_cents - start


def evaluate_chromosome(genes: np.ndarray, state: SimState) -> int:
    """Fitness (cents) of `genes` on a clone of `state`.

    The clone inherits the live RNG snapshot, so every chromosome evaluated
    from one state sees the same draws and identical chromosomes score
    identically.
    """
    return run_chromosome(state.clone(), genes)


def random_population(params: GAParams, n_vertiports: int,
                      rng: np.random.Generator) -> list[np.ndarray]:
    return [
        rng.integers(0, n_vertiports, size=params.batch_size).astype(np.int64)
        for _ in range(params.population)
    ]


def _tournament(pop: list[np.ndarray], fits: list[int],
                rng: np.random.Generator) -> np.ndarray:
    a = int(rng.integers(len(pop)))
    b = int(rng.integers(len(pop)))
    return pop[a] if fits[a] >= fits[b] else pop[b]


def evolve_generation(pop: list[np.ndarray], fits: list[int], params: GAParams,
                      rng: np.random.Generator, n_vertiports: int) -> list[np.ndarray]:
    """One elitist generation: copy elites, then tournament-select parents,
    single-point crossover with crossover_prob, per-gene uniform mutation."""
    order = sorted(range(len(pop)), key=lambda idx: (-fits[idx], idx))
    new_pop = [pop[idx].copy() for idx in order[: params.elite_count]]

    length = params.batch_size
    while len(new_pop) < params.population:
        p1 = _tournament(pop, fits, rng)
        p2 = _tournament(pop, fits, rng)
        if rng.random() < params.crossover_prob and length > 1:
            point = int(rng.integers(1, length))
            c1 = np.concatenate([p1[:point], p2[point:]])
            c2 = np.concatenate([p2[:point], p1[point:]])
        else:
            c1, c2 = p1.copy(), p2.copy()
        for child in (c1, c2):
            if len(new_pop) >= params.population:
                break
            mask = rng.random(length) < params.mutation_prob
            n_mut = int(mask.sum())
            if n_mut:
                child[mask] = rng.integers(0, n_vertiports, size=n_mut)
            new_pop.append(child)
    return new_pop


def solve_batch(state: SimState, params: GAParams,
                rng: np.random.Generator) -> BatchSolution:
    """Optimize the next batch of decisions from `state` (left untouched).

    `rng` drives only the genetic operators; fitness rollouts share the
    state's own RNG snapshot (common random numbers).
    """
    n = state.scenario.n

    pop = random_population(params, n, rng)
    fits = [evaluate_chromosome(c, state) for c in pop]

    best_idx = max(range(len(pop)), key=lambda idx: (fits[idx], -idx))
    best_genes = pop[best_idx].copy()
    best_fit = fits[best_idx]
    trace = [best_fit]

    for _ in range(params.max_iterations):
        pop = evolve_generation(pop, fits, params, rng, n)
        fits = [evaluate_chromosome(c, state) for c in pop]
        gen_best = max(range(len(pop)), key=lambda idx: (fits[idx], -idx))
        if fits[gen_best] > best_fit:
            best_fit = fits[gen_best]
            best_genes = pop[gen_best].copy()
        trace.append(max(fits))

    return BatchSolution(
        chromosome=best_genes,
        fitness_cents=best_fit,
        generation_best=tuple(trace),
    )


def ops_rng(episode_seed: int, batch_index: int) -> np.random.Generator:
    """Deterministic genetic-operator stream for one batch solve."""
    return np.random.default_rng(
        np.random.SeedSequence([episode_seed, batch_index, _STREAM_GA_OPS])
    )


def receding_horizon_schedule(scenario: Scenario,
                              params: GAParams | None = None,
                              on_decision: DecisionHook | None = None) -> ScheduleResult:
    """Alternate batch solves with committed simulation until episode end.

    Committing the winning chromosome consumes the same RNG snapshot its
    fitness was evaluated under, so per-batch committed profit equals the
    reported fitness. solver_seconds covers only the batch solves.
    """
    params = params or GAParams()
    state = init_episode(scenario)
    seed = scenario.config.seed
    result = ScheduleResult(log=state.log, solver_seconds=0.0)

    batch = 0
    while has_pending(state):
        t0 = time.perf_counter()
        solution = solve_batch(state, params, ops_rng(seed, batch))
        result.solver_seconds += time.perf_counter() - t0
        result.batches.append(solution)
        run_chromosome(state, solution.chromosome, on_decision)
        batch += 1

    result.log = state.log
    return result
