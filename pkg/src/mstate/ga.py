"""Genetic-algorithm search for the maximum-likelihood cluster configuration.

Master-slave layout on CPU: fitness of the whole population is evaluated in
fixed-size chunks (optionally across a thread pool), genetic operators are
applied in a deterministic sequential order. All randomness is drawn from
counter-based streams keyed by (master_seed, generation), so results are
bit-identical for a given seed regardless of worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .likelihood import _contributions, canonicalize

log = logging.getLogger(__name__)

# absolute fitness tolerance for stall detection
STALL_TOL = 1e-12

# population rows per fitness-evaluation chunk; fixed so that results do not
# depend on the worker count
FITNESS_CHUNK = 64

# (population, generations, stall) defaults per bar width in minutes
SCALE_DEFAULTS = {
    5: (4000, 4000, 1000),
    15: (1000, 4000, 500),
    30: (800, 4000, 500),
    60: (600, 4000, 500),
}

BRUTE_FORCE_MAX_N = 12


@dataclass
class GAConfig:
    population_size: int = 800
    max_generations: int = 4000
    stall_generations: int = 500
    mutation_probability: float = 0.09
    crossover_probability: float = 0.9
    elite_count: int = 1
    tournament_size: int = 2
    master_seed: int = 0

    def validate(self) -> None:
        if self.population_size < 2 * self.elite_count:
            raise ValueError("population_size must be at least 2 * elite_count")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        for name in ("mutation_probability", "crossover_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.stall_generations > self.max_generations:
            raise ValueError("stall_generations must not exceed max_generations")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")

    @classmethod
    def for_scale(cls, minutes: int, **overrides) -> "GAConfig":
        """Default parameterisation for a bar width, per-field overridable."""
        pop, gens, stall = SCALE_DEFAULTS[int(minutes)]
        base = dict(population_size=pop, max_generations=gens, stall_generations=stall)
        base.update(overrides)
        return cls(**base)


@dataclass
class GAResult:
    labels: np.ndarray          # canonical best configuration, 1-based
    log_likelihood: float
    generations: int
    termination: str            # "stall" | "max_generations"
    trajectory: np.ndarray = field(repr=False)  # best fitness per generation

    def to_json_dict(self) -> dict:
        return {
            "labels": [int(v) for v in self.labels],
            "log_likelihood": self.log_likelihood,
            "generations": self.generations,
            "termination": self.termination,
            "trajectory": [float(v) for v in self.trajectory],
        }


def _stream(master_seed: int, counter: int) -> np.random.Generator:
    key = np.array([np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF), np.uint64(counter)])
    return np.random.Generator(np.random.Philox(key=key))


def canonicalize_population(pop: np.ndarray) -> np.ndarray:
    """First-occurrence relabeling applied to every row of a (P, N) population."""
    n_pop, n_obj = pop.shape
    first = np.full((n_pop, n_obj + 1), n_obj, dtype=np.int64)
    rows = np.repeat(np.arange(n_pop), n_obj)
    cols = np.tile(np.arange(n_obj), n_pop)
    np.minimum.at(first, (rows, pop.ravel()), cols)
    order = np.argsort(first, axis=1, kind="stable")
    rank = np.empty_like(first)
    np.put_along_axis(rank, order, np.broadcast_to(np.arange(n_obj + 1), first.shape), axis=1)
    return rank[np.arange(n_pop)[:, None], pop] + 1


def _chunk_fitness(C: np.ndarray, chunk: np.ndarray) -> np.ndarray:
    """Log-likelihood of each canonical row of `chunk` against C."""
    n_obj = C.shape[0]
    k = int(chunk.max())
    onehot = (chunk[:, :, None] == np.arange(1, k + 1)[None, None, :]).astype(np.float64)
    grouped = np.matmul(C, onehot)                  # (p, N, K)
    c = np.einsum("pnk,pnk->pk", onehot, grouped)   # internal correlation sums
    n = onehot.sum(axis=1)
    del onehot, grouped
    if n_obj == 0:
        return np.zeros(len(chunk))
    return _contributions(n, c).sum(axis=1)


def population_log_likelihood(C, pop, workers: int = 1) -> np.ndarray:
    """Fitness of every individual; chunked so results are worker-count independent."""
    C = np.asarray(C, dtype=np.float64)
    pop = np.asarray(pop)
    out = np.empty(len(pop), dtype=np.float64)
    slices = [slice(i, min(i + FITNESS_CHUNK, len(pop))) for i in range(0, len(pop), FITNESS_CHUNK)]
    if workers <= 1 or len(slices) == 1:
        for sl in slices:
            out[sl] = _chunk_fitness(C, pop[sl])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for sl, res in zip(slices, pool.map(lambda s: _chunk_fitness(C, pop[s]), slices)):
                out[sl] = res
    return out


def init_population(n_objects: int, config: GAConfig) -> np.ndarray:
    """Uniform random canonical label vectors, deterministic per master_seed."""
    if n_objects < 2:
        raise ValueError("need at least 2 objects")
    rng = _stream(config.master_seed, 0)
    pop = rng.integers(1, n_objects + 1, size=(config.population_size, n_objects))
    return canonicalize_population(pop)


def evolve(C, config: GAConfig, workers: int = 1) -> GAResult:
    """Maximize the configuration log-likelihood over cluster label vectors.

    Each generation: parallel fitness evaluation, elitism, tournament
    selection, uniform crossover, single-gene mutation, canonicalization.
    Stops when the best fitness has not improved by more than STALL_TOL for
    `stall_generations` generations, or at `max_generations`.
    """
    config.validate()
    C = np.asarray(C, dtype=np.float64)
    n_obj = C.shape[0]
    pop = init_population(n_obj, config)
    n_pop = config.population_size
    n_off = n_pop - config.elite_count
    t_size = config.tournament_size

    best_fit = -np.inf
    best_labels = None
    stall = 0
    trajectory = []
    termination = "max_generations"
    generations = 0

    for gen in range(1, config.max_generations + 1):
        generations = gen
        fit = population_log_likelihood(C, pop, workers=workers)
        order = np.argsort(-fit, kind="stable")
        gen_best = float(fit[order[0]])
        if gen_best > best_fit + STALL_TOL:
            best_fit = gen_best
            best_labels = pop[order[0]].copy()
            stall = 0
        else:
            stall += 1
            if gen_best > best_fit:  # sub-tolerance drift still kept
                best_fit = gen_best
                best_labels = pop[order[0]].copy()
        trajectory.append(best_fit)
        if stall >= config.stall_generations:
            termination = "stall"
            break
        if gen == config.max_generations:
            break

        rng = _stream(config.master_seed, gen)
        elites = pop[order[: config.elite_count]]

        # tournament selection: higher fitness wins, ties to the first drawn
        cand = rng.integers(0, n_pop, size=(n_off, t_size))
        winner = np.argmax(fit[cand], axis=1)
        parents = pop[cand[np.arange(n_off), winner]]

        # uniform crossover over consecutive pairs
        n_pairs = n_off // 2
        do_cross = rng.random(n_pairs) < config.crossover_probability
        mask = rng.integers(0, 2, size=(n_pairs, n_obj)).astype(bool)
        children = parents.copy()
        a = parents[0 : 2 * n_pairs : 2]
        b = parents[1 : 2 * n_pairs : 2]
        cross_mask = mask & do_cross[:, None]
        children[0 : 2 * n_pairs : 2] = np.where(cross_mask, b, a)
        children[1 : 2 * n_pairs : 2] = np.where(cross_mask, a, b)

        # per-individual mutation: one uniformly chosen gene gets a uniform label
        do_mut = rng.random(n_off) < config.mutation_probability
        genes = rng.integers(0, n_obj, size=n_off)
        new_labels = rng.integers(1, n_obj + 1, size=n_off)
        rows = np.flatnonzero(do_mut)
        children[rows, genes[rows]] = new_labels[rows]

        pop = np.vstack([elites, canonicalize_population(children)])

    if best_fit <= 0.0:
        # no structure found: the all-singleton configuration is the
        # canonical zero-likelihood optimum
        best_labels = np.arange(1, n_obj + 1, dtype=np.int64)
        best_fit = 0.0
    return GAResult(
        labels=canonicalize(best_labels),
        log_likelihood=best_fit,
        generations=generations,
        termination=termination,
        trajectory=np.asarray(trajectory),
    )


def _all_partitions(n_obj: int) -> np.ndarray:
    """All set partitions of n objects as restricted growth strings (0-based).

    Rows are in ascending lexicographic order, so the all-singleton string
    [0, 1, ..., n-1] comes last.
    """
    rows = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(n_obj - 1):
        reps = maxes.astype(np.int64) + 2
        total = int(reps.sum())
        parent = np.repeat(np.arange(len(rows)), reps)
        offsets = np.arange(total) - np.repeat(np.cumsum(reps) - reps, reps)
        rows = np.concatenate([rows[parent], offsets[:, None].astype(np.int8)], axis=1)
        maxes = np.maximum(maxes[parent], offsets.astype(np.int8))
    return rows


def brute_force_best(C):
    """Exhaustive maximizer over all set partitions; test oracle for small N.

    Enumeration is effectively finest-first: among ties the lexicographically
    largest growth string wins, so uncorrelated data yields all singletons.
    """
    C = np.asarray(C, dtype=np.float64)
    n_obj = C.shape[0]
    if n_obj > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"brute force limited to N <= {BRUTE_FORCE_MAX_N}, got {n_obj}"
        )
    if n_obj == 1:
        return np.array([1], dtype=np.int64), 0.0
    parts = _all_partitions(n_obj)
    fitness = np.empty(len(parts), dtype=np.float64)
    step = 4096
    for i in range(0, len(parts), step):
        chunk = parts[i : i + step].astype(np.int64) + 1
        fitness[i : i + step] = _chunk_fitness(C, chunk)
    best = fitness.max()
    idx = int(np.flatnonzero(fitness == best)[-1])
    return canonicalize(parts[idx].astype(np.int64) + 1), float(best)
