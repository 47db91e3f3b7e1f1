"""Immune-algorithm pole selection over bitstring antibodies.

One antibody is a candidate subset; its affinity/fitness is a scalar in
which coverage strictly dominates pole count. A generation runs immune
selection, rank-proportional cloning, rank-scaled hypermutation,
near-duplicate suppression, and a partial refresh with random newcomers.
An elite (pruned to 1-minimality every generation) makes convergence
monotone. Exact and greedy set-cover oracles live here too, used as test
references and as the optional greedy population seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .coverage import PlanProblem, coverage_count, or_rows, popcount, prune_redundant

CLONE_CAP_FACTOR = 5  # total clones per generation capped at 5 * pop_size
ORACLE_MAX_CANDIDATES = 20


@dataclass(frozen=True, eq=False)
class Antibody:
    """A selection genome with cached evaluation results."""

    bits: np.ndarray  # (n_candidates,) bool
    fitness: float
    covered: int
    size: int
    sort_key: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class ImmuneParams:
    """Optimizer knobs. p_min/p_max default to 1/N and min(5/N, 0.5) once the
    problem size N is known."""

    pop_size: int = 50
    max_generations: int = 300
    stall_limit: int = 50
    select_frac: float = 0.2
    clone_beta: float = 1.0
    p_min: float | None = None
    p_max: float | None = None
    suppress_threshold: float = 0.05
    newcomer_frac: float = 0.1
    init_density: float = 0.1
    seed_greedy: bool = True

    def __post_init__(self) -> None:
        if self.pop_size < 2:
            raise ValueError(f"pop_size must be >= 2, got {self.pop_size}")
        if not 0.0 < self.select_frac <= 1.0:
            raise ValueError(f"select_frac {self.select_frac} outside (0, 1]")
        if not 0.0 <= self.suppress_threshold <= 1.0:
            raise ValueError(f"suppress_threshold {self.suppress_threshold} outside [0, 1]")
        if not 0.0 <= self.newcomer_frac <= 1.0:
            raise ValueError(f"newcomer_frac {self.newcomer_frac} outside [0, 1]")
        if not 0.0 <= self.init_density <= 1.0:
            raise ValueError(f"init_density {self.init_density} outside [0, 1]")
        if self.max_generations < 0 or self.stall_limit < 1:
            raise ValueError("max_generations must be >= 0 and stall_limit >= 1")
        if self.clone_beta <= 0:
            raise ValueError(f"clone_beta must be positive, got {self.clone_beta}")

    def resolved_mutation(self, n_candidates: int) -> tuple[float, float]:
        """Per-bit flip probabilities for a problem with N candidates."""
        p_max = self.p_max if self.p_max is not None else min(5.0 / max(n_candidates, 1), 0.5)
        p_min = self.p_min if self.p_min is not None else min(1.0 / max(n_candidates, 1), p_max)
        if not 0.0 <= p_min <= p_max <= 0.5:
            raise ValueError(f"mutation probabilities ({p_min}, {p_max}) violate 0 <= p_min <= p_max <= 0.5")
        return p_min, p_max


@dataclass(frozen=True)
class TraceEntry:
    generation: int
    best_fitness: float
    best_cov: float
    best_size: int
    seconds: float = field(compare=False, default=0.0)  # wall time, not part of the logical result


@dataclass(frozen=True)
class PlanResult:
    """Outcome of one optimizer run."""

    selected: list[int]  # candidate ids, sorted ascending
    covered: int
    cov: float
    uncoverable: list[int]  # demand indices no candidate can reach
    generations_run: int
    trace: list[TraceEntry]
    seed: int


def fitness(problem: PlanProblem, bits: np.ndarray) -> float:
    """(M' + 1) * cov + (1 - size/N); coverage strictly dominates pole count."""
    covered, cov = coverage_count(problem, bits)
    size = int(np.asarray(bits, dtype=bool).sum())
    return _fitness_value(problem, cov, size)


def _fitness_value(problem: PlanProblem, cov: float, size: int) -> float:
    n = problem.n_candidates
    return (problem.n_coverable + 1) * cov + (1.0 - (size / n if n else 0.0))


def _make_antibody(problem: PlanProblem, bits: np.ndarray, covered: int) -> Antibody:
    cov = 1.0 if problem.n_coverable == 0 else covered / problem.n_coverable
    size = int(bits.sum())
    fit = _fitness_value(problem, cov, size)
    # best-first ordering: highest fitness, then fewest poles, then
    # lexicographically smaller bit sequence (fully deterministic)
    key = (-fit, size, np.packbits(bits).tobytes())
    return Antibody(bits=bits, fitness=fit, covered=covered, size=size, sort_key=key)


def _evaluate(problem: PlanProblem, bits: np.ndarray) -> Antibody:
    covered = popcount(or_rows(problem.matrix.rows, bits) & problem.coverable_words)
    return _make_antibody(problem, bits, covered)


# below this many matrix cells, evaluation goes through a dense float matmul
# instead of per-antibody word ORs (numpy call overhead dominates tiny cases)
_DENSE_EVAL_CELLS = 1 << 18


def _evaluate_batch(problem: PlanProblem, all_bits: np.ndarray) -> list[Antibody]:
    """Evaluate a (k, N) stack of antibodies at once."""
    k, n = all_bits.shape
    if k == 0:
        return []
    m = problem.matrix.n_demand
    if n and m and n * m <= _DENSE_EVAL_CELLS:
        from .coverage import unpack_bits

        rows_cov = np.stack(
            [unpack_bits(problem.matrix.rows[i] & problem.coverable_words, m) for i in range(n)]
        ).astype(np.float32)
        counts = all_bits.astype(np.float32) @ rows_cov
        covered = (counts > 0.5).sum(axis=1)
        return [_make_antibody(problem, all_bits[i], int(covered[i])) for i in range(k)]
    return [_evaluate(problem, all_bits[i]) for i in range(k)]


def _rank_key(ab: Antibody) -> tuple:
    return ab.sort_key


def greedy_cover(problem: PlanProblem) -> np.ndarray:
    """Classical greedy cover: repeatedly take the candidate reaching the most
    still-uncovered coverable demand, ties by lowest id."""
    n = problem.n_candidates
    sel = np.zeros(n, dtype=bool)
    if n == 0 or problem.n_coverable == 0:
        return sel
    rows_c = problem.matrix.rows & problem.coverable_words[None, :]
    covered = np.zeros_like(problem.coverable_words)
    remaining = problem.n_coverable
    while remaining > 0:
        gains = np.bitwise_count(rows_c & ~covered).sum(axis=1)
        best = int(np.argmax(gains))
        gain = int(gains[best])
        if gain == 0:
            break
        sel[best] = True
        covered |= rows_c[best]
        remaining -= gain
    return sel


def brute_force_opt(problem: PlanProblem) -> tuple[int, np.ndarray]:
    """Exact minimum full cover of the coverable demand, by exhaustive search
    over subsets in ascending cardinality. Guarded to N <= 20."""
    n = problem.n_candidates
    if n > ORACLE_MAX_CANDIDATES:
        raise ValueError(f"oracle limit: refusing exhaustive search for N={n} > {ORACLE_MAX_CANDIDATES}")
    empty = np.zeros(n, dtype=bool)
    if problem.n_coverable == 0:
        return 0, empty
    coverable = int.from_bytes(problem.coverable_words.tobytes(), "little")
    row_ints = [
        int.from_bytes(problem.matrix.rows[i].tobytes(), "little") & coverable for i in range(n)
    ]
    for k in range(1, n + 1):
        best_bits = None
        best_key = None
        for combo in combinations(range(n), k):
            acc = 0
            for i in combo:
                acc |= row_ints[i]
            if acc == coverable:
                bits = empty.copy()
                bits[list(combo)] = True
                key = np.packbits(bits).tobytes()
                if best_key is None or key < best_key:
                    best_key, best_bits = key, bits
        if best_bits is not None:
            return k, best_bits
    raise AssertionError("the union of all rows must cover the coverable demand")


def init_population(problem: PlanProblem, params: ImmuneParams, rng: np.random.Generator) -> list[Antibody]:
    """pop_size random antibodies at init_density; member 0 is the greedy
    cover when seed_greedy is on."""
    n = problem.n_candidates
    if n == 0 and problem.n_coverable > 0:
        raise ValueError("cannot initialize a population with zero candidates and demand to cover")
    population = _evaluate_batch(problem, rng.random((params.pop_size, n)) < params.init_density)
    if params.seed_greedy and n > 0:
        population[0] = _evaluate(problem, greedy_cover(problem))
    return population


def _suppress(pool: list[Antibody], threshold: float, n_bits: int) -> list[Antibody]:
    """Scan the fitness-ordered pool, dropping members whose normalized
    Hamming distance to an already-kept member is below the threshold."""
    if threshold <= 0.0 or not pool or n_bits == 0:
        return list(pool)
    packed = np.packbits(np.stack([ab.bits for ab in pool]), axis=1)
    thr_bits = threshold * n_bits
    kept: list[int] = []
    for i in range(len(pool)):
        if kept:
            dist = np.bitwise_count(packed[kept] ^ packed[i]).sum(axis=1)
            if bool((dist < thr_bits).any()):
                continue
        kept.append(i)
    return [pool[i] for i in kept]


def step(
    problem: PlanProblem,
    params: ImmuneParams,
    population: list[Antibody],
    rng: np.random.Generator,
    elite: Antibody | None,
) -> tuple[list[Antibody], Antibody]:
    """One generation: select, clone, hypermutate, suppress, refresh; then
    fold the pruned generation best into the elite."""
    if not population:
        raise ValueError("population must be non-empty")
    n = problem.n_candidates
    pop_size = params.pop_size
    p_min, p_max = params.resolved_mutation(n)

    ranked = sorted(population, key=_rank_key)
    parents = ranked[: math.ceil(params.select_frac * pop_size)]
    s = len(parents)

    pool = list(parents)
    budget = CLONE_CAP_FACTOR * pop_size
    parent_stack: list[np.ndarray] = []
    flip_p: list[float] = []
    for rank, parent in enumerate(parents, start=1):
        n_clones = min(math.ceil(params.clone_beta * pop_size / rank), budget)
        if n_clones <= 0:
            break
        nu = (rank - 1) / max(s - 1, 1)
        p = p_min + (p_max - p_min) * nu
        parent_stack.extend([parent.bits] * n_clones)
        flip_p.extend([p] * n_clones)
        budget -= n_clones
    if parent_stack:
        originals = np.stack(parent_stack)
        flips = rng.random(originals.shape) < np.asarray(flip_p)[:, None]
        pool.extend(_evaluate_batch(problem, originals ^ flips))

    pool.sort(key=_rank_key)
    survivors = _suppress(pool, params.suppress_threshold, n)

    d = math.ceil(params.newcomer_frac * pop_size)
    new_population = survivors[: max(pop_size - d, 0)]
    shortfall = pop_size - len(new_population)
    if shortfall > 0:
        new_population.extend(
            _evaluate_batch(problem, rng.random((shortfall, n)) < params.init_density)
        )

    gen_best = min(new_population, key=_rank_key)
    pruned = _evaluate(problem, prune_redundant(problem, gen_best.bits))
    new_elite = pruned if elite is None or _rank_key(pruned) < _rank_key(elite) else elite
    return new_population, new_elite


def run(
    problem: PlanProblem,
    params: ImmuneParams | None = None,
    seed: int = 0,
    progress_callback=None,
    should_stop=None,
) -> PlanResult:
    """Run the optimizer to stall or the generation cap.

    Fully deterministic in (problem, params, seed). progress_callback, when
    given, is invoked as (generation, best_cov, best_size) once per
    generation; its failures are swallowed. should_stop, when given, is
    polled at each generation boundary for cooperative cancellation.
    """
    if params is None:
        params = ImmuneParams()
    uncoverable = problem.uncoverable_indices()
    if problem.n_coverable == 0:
        return PlanResult(
            selected=[], covered=0, cov=1.0, uncoverable=uncoverable,
            generations_run=0, trace=[], seed=seed,
        )

    rng = np.random.default_rng(seed & (2**64 - 1))
    population = init_population(problem, params, rng)
    best0 = min(population, key=_rank_key)
    elite = _evaluate(problem, prune_redundant(problem, best0.bits))

    trace: list[TraceEntry] = []
    stall = 0
    generations_run = 0
    for gen in range(params.max_generations):
        if should_stop is not None and should_stop():
            break
        t0 = time.perf_counter()
        population, new_elite = step(problem, params, population, rng, elite)
        seconds = time.perf_counter() - t0
        improved = new_elite.fitness > elite.fitness
        elite = new_elite
        generations_run = gen + 1
        best_cov = 1.0 if problem.n_coverable == 0 else elite.covered / problem.n_coverable
        trace.append(
            TraceEntry(
                generation=gen,
                best_fitness=elite.fitness,
                best_cov=best_cov,
                best_size=elite.size,
                seconds=seconds,
            )
        )
        if progress_callback is not None:
            try:
                progress_callback(gen, best_cov, elite.size)
            except Exception:
                pass
        stall = 0 if improved else stall + 1
        if stall >= params.stall_limit:
            break

    covered, cov = coverage_count(problem, elite.bits)
    return PlanResult(
        selected=[int(i) for i in np.flatnonzero(elite.bits)],
        covered=covered,
        cov=cov,
        uncoverable=uncoverable,
        generations_run=generations_run,
        trace=trace,
        seed=seed,
    )
