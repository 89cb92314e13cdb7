"""
Greedy cover engine shared by the brute-force splitter, the base bisector and
the base mapping family.

A pool is a lexicographically sorted, duplicate-free matrix of candidate image
tables (one row per candidate). Targets are addressed by index; a coverage
predicate maps (rows, target indices) to a boolean matrix. Each round picks the
row covering the most uncovered targets. Because rows are sorted, the first
row reaching the maximum is also the lexicographically smallest, so chunked or
threaded scoring always picks the same winner.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterator, List, Sequence, Tuple

import numpy as np

from derandkit.config import BuildConfig
from derandkit.errors import BadParams, PoolExhausted

logger = logging.getLogger(__name__)

CoverPredicate = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PoolDescriptor:
    """How a candidate pool was obtained."""

    mode: str  # "full" or "sampled"
    full_size: int
    size: int
    seed: int

    def as_provenance(self) -> dict:
        return {
            "pool": self.mode,
            "pool_size": str(self.size),
            "pool_full_size": str(self.full_size),
            "seed": str(self.seed),
        }


@dataclass(frozen=True)
class CoverageStep:
    scanned: int
    covered: int
    remaining: int

    @property
    def fraction(self) -> float:
        return self.covered / self.remaining if self.remaining else 1.0


@dataclass
class GreedyCoverState:
    """Uncovered targets, chosen rows and the progress log of one greedy run."""

    uncovered: np.ndarray
    pool: PoolDescriptor
    chosen: List[np.ndarray] = field(default_factory=list)
    coverage_log: List[CoverageStep] = field(default_factory=list)

    @property
    def remaining(self) -> int:
        return int(self.uncovered.sum())


# --- targets ---------------------------------------------------------------

def index_array(rows: Sequence[Sequence[int]], width: int) -> np.ndarray:
    """(len(rows), width) index matrix; works for width 0 too."""
    out = np.zeros((len(rows), width), dtype=np.intp)
    for i, row in enumerate(rows):
        if width:
            out[i] = row
    return out


def subset_targets(m: int, k: int) -> np.ndarray:
    if k > m:
        raise BadParams(f"no {k}-subsets of a {m}-element universe")
    return index_array(list(combinations(range(m), k)), k)


def pair_targets(m: int, k0: int, k1: int) -> Tuple[np.ndarray, np.ndarray]:
    """All disjoint (S0, S1) with |S0| = k0, |S1| = k1, as two index matrices."""
    if k0 + k1 > m:
        raise BadParams(f"k0 + k1 = {k0 + k1} exceeds universe size {m}")
    zeros: List[Tuple[int, ...]] = []
    ones: List[Tuple[int, ...]] = []
    for support in combinations(range(m), k0 + k1):
        for s1 in combinations(support, k1):
            chosen = set(s1)
            zeros.append(tuple(x for x in support if x not in chosen))
            ones.append(s1)
    return index_array(zeros, k0), index_array(ones, k1)


# --- pools -----------------------------------------------------------------

def _finish_pool(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    return np.unique(rows, axis=0)


def binary_pool(m: int, ones: int, config: BuildConfig) -> Tuple[np.ndarray, PoolDescriptor]:
    """Binary tables on [m] with exactly `ones` ones (full or seeded sample)."""
    if not 0 <= ones <= m:
        raise BadParams(f"cannot place {ones} ones in a universe of {m}")
    full_size = math.comb(m, ones)
    if full_size <= config.exhaustive_limit:
        positions = index_array(list(combinations(range(m), ones)), ones)
        rows = np.zeros((full_size, m), dtype=np.int8)
        if ones:
            rows[np.arange(full_size)[:, None], positions] = 1
        descriptor = PoolDescriptor("full", full_size, full_size, config.seed)
    else:
        rng = np.random.default_rng(config.seed)
        keys = rng.random((config.sample_size, m))
        positions = np.argsort(keys, axis=1)[:, :ones]
        rows = np.zeros((config.sample_size, m), dtype=np.int8)
        rows[np.arange(config.sample_size)[:, None], positions] = 1
        rows = _finish_pool(rows)
        descriptor = PoolDescriptor("sampled", full_size, rows.shape[0], config.seed)
        logger.warning(
            "Binary pool C(%d,%d)=%d exceeds budget; sampled %d candidates (seed %d)",
            m, ones, full_size, rows.shape[0], config.seed,
        )
    return _finish_pool(rows), descriptor


def balanced_counts(t: int, ell: int) -> Tuple[int, int]:
    """(q, r): r values get q + 1 preimages, the other ell - r get q."""
    return divmod(t, ell)


def balanced_pool_size(t: int, ell: int) -> int:
    q, r = balanced_counts(t, ell)
    arrangements = math.factorial(t) // (
        math.factorial(q + 1) ** r * math.factorial(q) ** (ell - r)
    )
    return math.comb(ell, r) * arrangements


def _balanced_tables(t: int, ell: int) -> Iterator[Tuple[int, ...]]:
    q, r = balanced_counts(t, ell)
    counts = [0] * ell
    table: List[int] = []

    def feasible(position: int, extra_used: int) -> bool:
        remaining = t - position
        missing = sum(q - c for c in counts if c < q)
        return missing <= remaining and extra_used <= r

    def walk(position: int, extra_used: int):
        if position == t:
            yield tuple(table)
            return
        for value in range(ell):
            count = counts[value]
            if count > q or (count == q and extra_used == r):
                continue
            bumped = extra_used + (1 if count == q else 0)
            counts[value] += 1
            table.append(value)
            if feasible(position + 1, bumped):
                yield from walk(position + 1, bumped)
            table.pop()
            counts[value] -= 1

    yield from walk(0, 0)


def balanced_pool(t: int, ell: int, config: BuildConfig) -> Tuple[np.ndarray, PoolDescriptor]:
    """Strongly balanced tables [t] -> [ell] (preimages of size floor/ceil of t/ell)."""
    full_size = balanced_pool_size(t, ell)
    if full_size <= config.exhaustive_limit:
        rows = np.array(list(_balanced_tables(t, ell)), dtype=np.int32).reshape(-1, t)
        return _finish_pool(rows), PoolDescriptor("full", full_size, rows.shape[0], config.seed)

    q, r = balanced_counts(t, ell)
    base = np.repeat(np.arange(ell), [q + 1] * r + [q] * (ell - r)).astype(np.int32)
    rng = np.random.default_rng(config.seed)
    size = config.sample_size
    rows = rng.permuted(np.tile(base, (size, 1)), axis=1)
    labels = rng.permuted(np.tile(np.arange(ell, dtype=np.int32), (size, 1)), axis=1)
    rows = _finish_pool(np.take_along_axis(labels, rows, axis=1))
    logger.warning(
        "Balanced pool for [%d]->[%d] has %d members; sampled %d (seed %d)",
        t, ell, full_size, rows.shape[0], config.seed,
    )
    return rows, PoolDescriptor("sampled", full_size, rows.shape[0], config.seed)


# --- predicates ------------------------------------------------------------

def injective_on(targets: np.ndarray) -> CoverPredicate:
    """Covered iff the row takes k distinct values on the subset."""

    def covers(rows: np.ndarray, idx: np.ndarray) -> np.ndarray:
        picked = np.sort(rows[:, targets[idx]], axis=2)
        return (np.diff(picked, axis=2) != 0).all(axis=2)

    return covers


def zero_on(targets: np.ndarray) -> CoverPredicate:
    """Covered iff the row is 0 on the whole subset."""

    def covers(rows: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return ~(rows[:, targets[idx]] != 0).any(axis=2)

    return covers


def maps_pair(zeros: np.ndarray, ones: np.ndarray, hits: int) -> CoverPredicate:
    """Covered iff the row is 0 on S0 and exactly `hits` of S1 are 1."""

    def covers(rows: np.ndarray, idx: np.ndarray) -> np.ndarray:
        clean = ~(rows[:, zeros[idx]] != 0).any(axis=2)
        hit = (rows[:, ones[idx]] == 1).sum(axis=2) == hits
        return clean & hit

    return covers


# --- engine ----------------------------------------------------------------

def _score_chunks(
    pool: np.ndarray,
    idx: np.ndarray,
    covers: CoverPredicate,
    chunk: int,
    executor,
) -> np.ndarray:
    bounds = [(start, min(start + chunk, pool.shape[0])) for start in range(0, pool.shape[0], chunk)]

    def score(bound):
        start, stop = bound
        return covers(pool[start:stop], idx).sum(axis=1)

    if executor is None or len(bounds) == 1:
        parts = [score(bound) for bound in bounds]
    else:
        parts = list(executor.map(score, bounds))
    return np.concatenate(parts)


def greedy_cover(
    pool: np.ndarray,
    descriptor: PoolDescriptor,
    target_count: int,
    target_width: int,
    covers: CoverPredicate,
    config: BuildConfig,
) -> GreedyCoverState:
    """
    Pick rows greedily until every target is covered.

    Raises:
        PoolExhausted: some targets remain but no row covers any of them.
    """
    state = GreedyCoverState(uncovered=np.ones(target_count, dtype=bool), pool=descriptor)
    if pool.shape[0] == 0:
        raise PoolExhausted("empty candidate pool")
    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        while state.uncovered.any():
            idx = np.flatnonzero(state.uncovered)
            per_row = max(1, idx.size * max(target_width, 1))
            chunk = max(1, config.chunk_elements // per_row)
            scores = _score_chunks(pool, idx, covers, chunk, executor)
            best = int(scores.max())
            if best == 0:
                raise PoolExhausted(
                    f"{idx.size} targets left but no candidate in the {descriptor.mode} "
                    f"pool of {pool.shape[0]} covers any of them"
                )
            winner = int(np.flatnonzero(scores == best)[0])
            row = pool[winner]
            newly = covers(row[None, :], idx)[0]
            state.uncovered[idx[newly]] = False
            state.chosen.append(row.copy())
            step = CoverageStep(scanned=pool.shape[0], covered=best, remaining=idx.size)
            state.coverage_log.append(step)
            logger.debug(
                "greedy round %d: covered %d of %d (pool %d)",
                len(state.chosen), best, idx.size, pool.shape[0],
            )
    finally:
        if executor is not None:
            executor.shutdown()
    return state
