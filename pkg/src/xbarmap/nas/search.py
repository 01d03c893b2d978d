"""Hardware-aware NSGA-II search over the elastic space.

Each candidate is decoded, compiled onto the crossbar budget (partition,
duplication, packing) and simulated; the surrogate supplies accuracy. A
candidate whose single-copy network cannot be packed is infeasible and
carries the unplaced area as its violation.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..compiler import compile_network
from ..duplication import DuplicationInfeasible
from ..netir import HWConfig, Network
from ..packing import PackingInfeasible, utilization
from ..simulator import simulate
from . import nsga2
from .space import Genome, SearchSpace, decode_genome, gene_names
from .surrogate import ParamSurrogate

log = logging.getLogger(__name__)

Surrogate = Callable[[Genome, Network], float]


class SearchInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class Candidate:
    genome: Genome
    accuracy: float | None = None
    total_cycles: int | None = None
    containers_used: int = 0
    utilization: float = 0.0
    feasible: bool = False
    violation: int = 0

    @property
    def objectives(self) -> tuple[float, int] | None:
        if self.accuracy is None or self.total_cycles is None:
            return None
        return (self.accuracy, self.total_cycles)

    def minimization(self) -> tuple[float, float]:
        if self.objectives is None:
            return (0.0, float("inf"))
        return (-self.accuracy, float(self.total_cycles))


class Evaluator:
    """Memoized candidate evaluation; results depend only on the genome."""

    def __init__(self, space: SearchSpace, hw: HWConfig, surrogate: Surrogate | None = None, n_samples: int = 1):
        self.space = space
        self.hw = hw
        self.surrogate = surrogate or ParamSurrogate(space)
        self.n_samples = n_samples
        self.cache: dict[tuple[int, ...], Candidate] = {}

    def __call__(self, genome: Genome) -> Candidate:
        hit = self.cache.get(genome.genes)
        if hit is not None:
            return hit
        cand = self._evaluate(genome)
        self.cache[genome.genes] = cand
        return cand

    def _evaluate(self, genome: Genome) -> Candidate:
        net = decode_genome(genome, self.space)
        acc = float(self.surrogate(genome, net))
        try:
            result = compile_network(net, self.hw, duplicate=self.hw.bounded)
        except PackingInfeasible as exc:
            return Candidate(genome, violation=exc.deficit)
        except DuplicationInfeasible as exc:
            return Candidate(genome, violation=exc.deficit)
        report = simulate(result.plan, net, self.n_samples)
        return Candidate(
            genome, accuracy=acc, total_cycles=report.total_cycles,
            containers_used=result.plan.containers_used,
            utilization=utilization(result.plan), feasible=True,
        )


def _arrays(pop: Sequence[Candidate]) -> tuple[np.ndarray, np.ndarray]:
    F = np.array([c.minimization() for c in pop], dtype=float)
    V = np.array([0 if c.feasible else max(1, c.violation) for c in pop], dtype=float)
    return F, V


def evolve(
    pop: Sequence[Candidate],
    space: SearchSpace,
    evaluate: Callable[[Genome], Candidate],
    rng: np.random.Generator,
    mutation_prob: float = 0.25,
) -> list[Candidate]:
    """One elitist generation: tournament, uniform crossover, one-gene mutation, survival."""
    n = len(pop)
    F, V = _arrays(pop)
    ranks, crowd = nsga2.rank_and_crowd(F, V)
    offspring: list[Candidate] = []
    while len(offspring) < n:
        a = pop[nsga2.binary_tournament(ranks, crowd, rng)]
        b = pop[nsga2.binary_tournament(ranks, crowd, rng)]
        for genes in nsga2.uniform_crossover(a.genome.genes, b.genome.genes, rng):
            if len(offspring) == n:
                break
            if rng.random() < mutation_prob:
                genes = nsga2.mutate_one(genes, space.gene_options, rng)
            offspring.append(evaluate(Genome(genes)))
    combined = list(pop) + offspring
    F, V = _arrays(combined)
    return [combined[i] for i in nsga2.select_survivors(F, V, n)]


def pareto_front(cands: Sequence[Candidate]) -> list[Candidate]:
    """Rank-0 feasible candidates, one per genome, ordered by cycles."""
    unique = list({c.genome.genes: c for c in cands if c.feasible}.values())
    if not unique:
        return []
    F, _ = _arrays(unique)
    ranks = nsga2.fast_nondominated_sort(F)
    front = [c for c, r in zip(unique, ranks) if r == 0]
    return sorted(front, key=lambda c: (c.total_cycles, -c.accuracy, c.genome.genes))


def choose(front: Sequence[Candidate], preference: str) -> Candidate:
    if preference in ("acc", "accuracy"):
        return max(front, key=lambda c: (c.accuracy, -c.total_cycles))
    if preference in ("speed", "latency"):
        return min(front, key=lambda c: (c.total_cycles, -c.accuracy))
    raise ValueError(f"unknown preference {preference!r}")


@dataclass
class SearchResult:
    front: list[Candidate]
    chosen: Candidate
    population: list[Candidate]
    hypervolumes: list[float]
    ref_point: tuple[float, float]
    evaluations: int
    archive: list[Candidate] = field(repr=False, default_factory=list)


def search(
    space: SearchSpace,
    hw: HWConfig,
    preference: str = "acc",
    seed: int = 0,
    pop_size: int = 50,
    generations: int = 100,
    mutation_prob: float = 0.25,
    n_samples: int = 1,
    surrogate: Surrogate | None = None,
    callback: Callable[[int, list[Candidate]], None] | None = None,
    evaluator: Evaluator | None = None,
) -> SearchResult:
    """Run NSGA-II and return the rank-0 front of every candidate it evaluated.

    Passing an ``evaluator`` shares its cache across runs; evaluation is
    pure, so this changes run time only. Its space and hardware must match.
    """
    shared = evaluator or Evaluator(space, hw, surrogate, n_samples)
    if shared.space != space or shared.hw != hw or shared.n_samples != n_samples:
        raise ValueError("evaluator was built for a different space, budget or sample count")
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(generations + 1)]

    # everything this run evaluated, offspring included; the front is drawn from it
    seen: dict[tuple[int, ...], Candidate] = {}
    fresh: list[Candidate] = []

    def evaluate(genome: Genome) -> Candidate:
        cand = shared(genome)
        if genome.genes not in seen:
            seen[genome.genes] = cand
            fresh.append(cand)
        return cand

    pop = [evaluate(space.random_genome(streams[0])) for _ in range(pop_size)]
    archive: list[Candidate] = []
    ref: tuple[float, float] | None = None
    hvs: list[float] = []

    def track() -> None:
        nonlocal archive, ref
        archive = pareto_front(archive + fresh)
        fresh.clear()
        if ref is None and archive:
            ref = (0.0, 2.0 * max(c.total_cycles for c in seen.values() if c.feasible))
        hvs.append(nsga2.hypervolume_2d([c.minimization() for c in archive], ref) if ref else 0.0)

    track()
    for gen in range(1, generations + 1):
        pop = evolve(pop, space, evaluate, streams[gen], mutation_prob)
        track()
        if callback is not None:
            callback(gen, pop)
        log.debug("gen %d: front %d, hv %.4g, evaluated %d", gen, len(archive), hvs[-1], len(seen))

    if not archive:
        worst = min(c.violation for c in seen.values())
        raise SearchInfeasible(
            f"no candidate fits {hw.num_xbars} crossbars (smallest overflow {worst} cells); "
            "raise num_xbars"
        )
    return SearchResult(
        front=archive, chosen=choose(archive, preference), population=pop,
        hypervolumes=hvs, ref_point=ref, evaluations=len(seen), archive=list(seen.values()),
    )


CSV_FIELDS = gene_names() + ["surrogate_accuracy", "total_cycles", "containers_used", "utilization", "feasible"]


def front_csv(front: Sequence[Candidate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for c in front:
        w.writerow(list(c.genome.genes) + [
            f"{c.accuracy:.6f}" if c.accuracy is not None else "",
            c.total_cycles if c.total_cycles is not None else "",
            c.containers_used,
            f"{c.utilization:.6f}",
            int(c.feasible),
        ])
    return buf.getvalue()
