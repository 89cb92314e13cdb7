"""
Bisector constructions: binary functions with exactly ceil(alpha*n) ones such
that every k-subset is mapped to 0 by some member.

Building blocks, bottom-up:
    base_bisector      greedy cover over all tables with the right ones-count
    extend_by_d        grow the universe by d using k+1 disjoint forbidden blocks
    extend_modulo      pull back through x mod n2, then extend_by_d
    alpha_bisector     stack stages on the surviving zero-sets
    interval_bisector  guess interval plans, combine per-interval bisectors
"""

import logging
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from derandkit.config import DEFAULT_CONFIG, BuildConfig
from derandkit.errors import (
    BadParams,
    GuessSpaceTooLarge,
    OracleRejected,
    PreconditionFailed,
)
from derandkit.family import (
    Family,
    Function,
    as_fraction,
    binary_function,
    ceil_fraction,
    make_family,
    make_function,
)
from derandkit.greedy import binary_pool, greedy_cover, subset_targets, zero_on
from derandkit.oracle import verify_bisector
from derandkit.primes import ceil_checked

logger = logging.getLogger(__name__)


def _floor_fraction(alpha: Fraction, n: int) -> int:
    return (alpha.numerator * n) // alpha.denominator


def _regime_flags(n: int, k: int) -> List[str]:
    flags = []
    if k < 16:
        flags.append("k_below_16")
    if n < k ** 4:
        flags.append("n_below_k4")
    return flags


def _rebuild(
    family: Family,
    n: int,
    functions: Sequence[Function],
    regime: Iterable[str] = (),
    **provenance: str,
) -> Family:
    """Same kind and parameters as `family`, new universe and members."""
    return make_family(
        family.kind, n, family.k, functions,
        alpha=family.alpha,
        beta=family.beta,
        k0=family.k0,
        k1=family.k1,
        regime=list(family.regime) + list(regime),
        provenance={**family.provenance, **provenance},
    )


def certify_bisector(family: Family) -> Family:
    report = verify_bisector(family, family.k, family.alpha)
    if not report.valid:
        raise OracleRejected(
            f"bisector n={family.n} k={family.k} alpha={family.alpha} rejected, "
            f"witness {report.witness_text()}",
            report,
        )
    return family


def _finish(family: Family, certify: bool) -> Family:
    if certify and (family.regime or family.provenance.get("pool") == "sampled"):
        certify_bisector(family)
    logger.info(
        "bisector n=%d k=%d alpha=%s size=%d builder=%s",
        family.n, family.k, family.alpha, len(family), family.provenance.get("builder"),
    )
    return family


# --- greedy base -------------------------------------------------------------

def bisector_progress_bound(m: int, ones: int, k: int) -> float:
    """Probability that a uniformly random table with `ones` ones is 0 on a fixed k-subset."""
    bound = 1.0
    for i in range(k):
        bound *= (m - ones - i) / (m - i)
    return bound


def base_bisector(
    m: int,
    k: int,
    ones_fraction,
    config: Optional[BuildConfig] = None,
    certify: bool = True,
) -> Family:
    """
    Greedy (m, k, fraction)-bisector.

    Candidates are all binary tables on [m] with exactly ceil(fraction*m) ones
    (or a seeded sample of them when there are too many). Each round adds the
    candidate that is all-zero on the most still-uncovered k-subsets.

    Raises:
        BadParams: fraction outside [0, 1] or fewer than k zeros per table.
        PoolExhausted: a sampled pool cannot finish the cover.
    """
    config = config or DEFAULT_CONFIG
    fraction = as_fraction(ones_fraction)
    if not 0 <= fraction <= 1:
        raise BadParams(f"ones fraction must lie in [0, 1], got {fraction}")
    if k < 0 or k > m:
        raise BadParams(f"need 0 <= k <= m, got k={k}, m={m}")
    ones = ceil_fraction(fraction, m)
    if m - ones < k:
        raise BadParams(f"{ones} ones on [{m}] leave fewer than k={k} zeros")
    pool, descriptor = binary_pool(m, ones, config)
    targets = subset_targets(m, k)
    state = greedy_cover(pool, descriptor, targets.shape[0], k, zero_on(targets), config)
    if descriptor.mode == "full":
        bound = bisector_progress_bound(m, ones, k)
        slow = sum(1 for step in state.coverage_log if step.fraction < bound)
        if slow:
            logger.warning("%d greedy rounds on [%d] fell below the progress bound %.4f", slow, m, bound)
    functions = [make_function(m, 2, row.tolist()) for row in state.chosen]
    family = make_family(
        "bisector", m, k, functions,
        alpha=fraction,
        regime=_regime_flags(m, k) if k else (),
        provenance={"builder": "base_bisector", **descriptor.as_provenance()},
        coverage_log=state.coverage_log,
    )
    return _finish(family, certify)


# --- extensions ----------------------------------------------------------------

def extend_by_d(family: Family, d: int, k: Optional[int] = None, certify: bool = True) -> Family:
    """
    Grow the universe from n to n + d.

    For each of the k+1 disjoint blocks [j*d, (j+1)*d) the input family is
    re-embedded on the other n elements (order preserved); the block itself
    receives the extra ceil(alpha(n+d)) - ceil(alpha n) ones at its lowest
    positions. A k-subset avoids one of the blocks.

    Raises:
        PreconditionFailed: d * (k+1) >= n.
    """
    k = family.k if k is None else k
    if d < 0:
        raise BadParams(f"d must be non-negative, got {d}")
    if d == 0:
        return family
    n = family.n
    if d * (k + 1) >= n:
        raise PreconditionFailed(f"extend_by_d needs d*(k+1) < n, got {d}*{k + 1} >= {n}")
    extra = ceil_fraction(family.alpha, n + d) - ceil_fraction(family.alpha, n)
    functions: List[Function] = []
    for j in range(k + 1):
        block = range(j * d, (j + 1) * d)
        rest = [x for x in range(n + d) if x not in block]
        for f in family.functions:
            images = [0] * (n + d)
            for position, x in enumerate(rest):
                images[x] = f.images[position]
            for x in block[:extra]:
                images[x] = 1
            functions.append(make_function(n + d, 2, images))
    result = _rebuild(family, n + d, functions, builder_extend=f"by_d:{d}")
    return _finish(result, certify)


def extend_modulo(family: Family, n1: int, k: Optional[int] = None, certify: bool = True) -> Family:
    """
    Pull a bisector on [n2] back to [n1] through x -> x mod n2.

    On [c*n2] (c = n1 // n2) every k-subset has at most k residues, so the
    pulled-back tables still cover it. The pullback may carry more ones than
    ceil(alpha*c*n2); the excess is cleared at the lowest-indexed ones, which
    only enlarges zero-sets. The remainder d = n1 mod n2 is added with
    extend_by_d, in several steps if d*(k+1) is too large for one. Every step
    multiplies the size by k+1, so s steps give (k+1)^s * |family| tables.

    Raises:
        BadParams: unless k <= n2 <= n1, or for non-bisector kinds.
    """
    k = family.k if k is None else k
    n2 = family.n
    if family.kind != "bisector":
        raise BadParams("extend_modulo only applies to bisector families")
    if not k <= n2 <= n1:
        raise BadParams(f"extend_modulo needs k <= n2 <= n1, got k={k}, n2={n2}, n1={n1}")
    if n1 == n2:
        return family
    c, d = divmod(n1, n2)
    m = c * n2
    target = ceil_fraction(family.alpha, m)
    functions: List[Function] = []
    for f in family.functions:
        images = [f.images[x % n2] for x in range(m)]
        excess = sum(images) - target
        for x in range(m):
            if excess <= 0:
                break
            if images[x] == 1:
                images[x] = 0
                excess -= 1
        functions.append(make_function(m, 2, images))
    current = _rebuild(family, m, functions, builder_extend=f"modulo:{n2}->{n1}")
    remaining = d
    while remaining:
        step = min(remaining, (current.n - 1) // (k + 1))
        if step <= 0:
            raise PreconditionFailed(f"cannot extend [{current.n}] by {remaining} for k={k}")
        current = extend_by_d(current, step, k, certify=False)
        remaining -= step
    return _finish(current, certify)


# --- iterated construction -----------------------------------------------------

def iteration_count(k: int, alpha) -> int:
    """t = ceil(sqrt(k) * ln(1 / (1 - alpha)))."""
    alpha = as_fraction(alpha)
    if not 0 <= alpha < 1:
        raise BadParams(f"iteration_count needs 0 <= alpha < 1, got {alpha}")
    if k < 0:
        raise BadParams(f"k must be non-negative, got {k}")
    if alpha == 0 or k == 0:
        return 0
    rest = 1 - alpha
    value = math.sqrt(k) * math.log(rest.denominator / rest.numerator)

    def exact() -> Decimal:
        return Decimal(k).sqrt() * (Decimal(rest.denominator) / Decimal(rest.numerator)).ln()

    return ceil_checked(value, exact)


def stage_ones(z: int, k: int) -> int:
    """Smallest w with w >= z / sqrt(k), computed exactly."""
    if k <= 1:
        return z
    w = math.isqrt(z * z // k)
    while w * w * k < z * z:
        w += 1
    return w


def stage_bisector(z: int, k: int, fraction: Fraction, config: BuildConfig) -> Family:
    """
    (z, k, fraction)-bisector for one stage.

    Uses the greedy base on [z] when its pool fits the budget, otherwise the
    greedy base on a universe of about k^3 pulled back with extend_modulo.
    """
    ones = ceil_fraction(fraction, z)
    if math.comb(z, ones) <= config.exhaustive_limit:
        return base_bisector(z, k, fraction, config, certify=False)
    m0 = min(z, max(k ** 3, 2 * k, 2))
    while m0 < z and m0 - ceil_fraction(fraction, m0) < k:
        m0 += 1
    base = base_bisector(m0, k, fraction, config, certify=False)
    return extend_modulo(base, z, k, certify=False)


def attach_on_zeros(functions: Sequence[Function], stage: Family) -> List[Function]:
    """Apply every stage table to the zero-set of every current table."""
    out: List[Function] = []
    for f in functions:
        zeros = f.zeros_positions()
        for g in stage.functions:
            images = list(f.images)
            for j, x in enumerate(zeros):
                images[x] = g.images[j]
            out.append(make_function(f.n, 2, images))
    return out


def _trivial_bisector(n: int, k: int, alpha: Fraction, builder: str) -> Family:
    ones = ceil_fraction(alpha, n)
    return make_family(
        "bisector", n, k, [binary_function(n, range(n - ones, n))],
        alpha=alpha,
        provenance={"builder": builder, "stages": "0"},
    )


def alpha_bisector(
    n: int, k: int, alpha, config: Optional[BuildConfig] = None, certify: bool = True
) -> Family:
    """
    (n, k, alpha)-bisector by stacking stages.

    Stage i places about z/sqrt(k) new ones on the current zero-set of size z;
    the last stage places exactly what is left to reach ceil(alpha*n). Every
    stage table is attached to every table built so far, so the size is the
    product of the stage sizes.

    Raises:
        BadParams: alpha outside [0, 1] or fewer than k zeros would remain.
    """
    config = config or DEFAULT_CONFIG
    alpha = as_fraction(alpha)
    if not 0 <= alpha <= 1:
        raise BadParams(f"alpha must lie in [0, 1], got {alpha}")
    if k < 0 or k > n:
        raise BadParams(f"need 0 <= k <= n, got k={k}, n={n}")
    total = ceil_fraction(alpha, n)
    if n - total < k:
        raise BadParams(f"ceil(alpha*n)={total} ones leave fewer than k={k} zeros on [{n}]")
    if total == 0 or k == 0:
        return _trivial_bisector(n, k, alpha, "alpha_bisector")

    functions: List[Function] = [make_function(n, 2, [0] * n)]
    regime = _regime_flags(n, k)
    fractions: List[str] = []
    placed, z = 0, n
    while placed < total:
        w = min(stage_ones(z, k), total - placed)
        stage = stage_bisector(z, k, Fraction(w, z), config)
        regime.extend(stage.regime)
        functions = attach_on_zeros(functions, stage)
        fractions.append(f"{w}/{z}")
        logger.debug("alpha_bisector stage %d: %d ones on %d, %d tables", len(fractions), w, z, len(functions))
        placed += w
        z -= w
    family = make_family(
        "bisector", n, k, functions,
        alpha=alpha,
        regime=regime,
        provenance={
            "builder": "alpha_bisector",
            "stages": str(len(fractions)),
            "stage_fractions": ",".join(fractions),
            "iteration_count": str(iteration_count(k, alpha)) if alpha < 1 else "n/a",
        },
    )
    return _finish(family, certify)


# --- interval decomposition --------------------------------------------------------

@dataclass(frozen=True)
class IntervalPlan:
    """
    One guess: consecutive intervals of the non-reservoir elements, each padded
    with its own slice of the reservoir.

    Attributes:
        intervals: Elements of each interval (ascending).
        reservoir: Reservoir elements (a guess that avoids the target subset).
        augmented: Interval plus its reservoir slice, ascending.
        ones: Ones assigned to each augmented range; sums to ceil(alpha*n).
    """

    intervals: Tuple[Tuple[int, ...], ...]
    reservoir: Tuple[int, ...]
    augmented: Tuple[Tuple[int, ...], ...]
    ones: Tuple[int, ...]


def apportion(total: int, sizes: Sequence[int], alpha: Fraction) -> Tuple[int, ...]:
    """floor(alpha*u) per part, plus one for the largest fractional parts, summing to total."""
    floors = [_floor_fraction(alpha, u) for u in sizes]
    remainder = total - sum(floors)
    order = sorted(range(len(sizes)), key=lambda i: (-(alpha * sizes[i] - floors[i]), i))
    ones = list(floors)
    for i in order[:remainder]:
        ones[i] += 1
    return tuple(ones)


def _split_evenly(items: Sequence[int], parts: int) -> List[Tuple[int, ...]]:
    base, extra = divmod(len(items), parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + base + (1 if i < extra else 0)
        out.append(tuple(items[start:stop]))
        start = stop
    return out


def enumerate_interval_plans(
    n: int,
    k: int,
    pieces: int,
    pad: int,
    reservoir: int,
    granularity: int,
    alpha: Fraction,
    config: BuildConfig,
) -> List[IntervalPlan]:
    """
    All distinct plans: k+1 disjoint reservoir blocks times every choice of
    pieces-1 grid cut points over the remaining elements.

    Raises:
        BadParams: the k+1 reservoir blocks do not fit into [n].
        GuessSpaceTooLarge: more plans than config.guess_budget.
    """
    if reservoir and (k + 1) * reservoir > n:
        raise BadParams(
            f"n={n} too small for {k + 1} reservoir blocks of size {reservoir}"
        )
    blocks = [tuple(range(j * reservoir, (j + 1) * reservoir)) for j in range(k + 1)] if reservoir else [()]
    rest_size = n - reservoir
    grid = sorted(set(range(0, rest_size + 1, max(1, granularity))) | {rest_size})
    guesses = len(blocks) * math.comb(len(grid) + pieces - 2, pieces - 1)
    if guesses > config.guess_budget:
        raise GuessSpaceTooLarge(
            f"{guesses} interval guesses exceed the budget of {config.guess_budget}"
        )
    total = ceil_fraction(alpha, n)
    plans: List[IntervalPlan] = []
    seen = set()
    for block in blocks:
        taken = set(block)
        rest = [x for x in range(n) if x not in taken]
        slices = _split_evenly(block, pieces)
        for cuts in combinations_with_replacement(grid, pieces - 1):
            bounds = (0,) + cuts + (rest_size,)
            intervals = tuple(tuple(rest[bounds[i] : bounds[i + 1]]) for i in range(pieces))
            augmented = tuple(
                tuple(sorted(intervals[i] + slices[i])) for i in range(pieces)
            )
            if any(len(part) < pad for part in augmented) or augmented in seen:
                continue
            seen.add(augmented)
            ones = apportion(total, [len(part) for part in augmented], alpha)
            plans.append(IntervalPlan(intervals, block, augmented, ones))
    return plans


def minimal_pad(alpha: Fraction, zeros_needed: int, ones_needed: int = 0) -> int:
    """Smallest u with u - ceil(alpha*u) >= zeros_needed and floor(alpha*u) >= ones_needed."""
    u = max(1, zeros_needed + ones_needed)
    while u - ceil_fraction(alpha, u) < zeros_needed or _floor_fraction(alpha, u) < ones_needed:
        u += 1
        if u > 1_000_000:
            raise BadParams(f"no padded size works for alpha={alpha}")
    return u


def default_reservoir(n: int, k: int, pieces: int, pad: int, config: BuildConfig) -> int:
    if config.reservoir is not None:
        return config.reservoir
    if k >= 1 and n >= k ** 5 and k ** 4 >= pieces * pad and (k + 1) * k ** 4 <= n:
        return k ** 4
    return pieces * pad


def combine_plans(
    n: int,
    plans: Sequence[IntervalPlan],
    build_part: Callable[[int, Fraction], Family],
    config: BuildConfig,
) -> Tuple[List[Function], List[int]]:
    """Every combination of per-interval members, for every plan."""
    part_families = []
    sizes: List[int] = []
    for plan in plans:
        parts = [
            build_part(len(aug), Fraction(ones, len(aug)))
            for aug, ones in zip(plan.augmented, plan.ones)
        ]
        part_families.append(parts)
        sizes.append(math.prod(len(part) for part in parts))
    if sum(sizes) > config.max_family_size:
        raise GuessSpaceTooLarge(
            f"interval construction would emit {sum(sizes)} functions "
            f"(limit {config.max_family_size})"
        )
    functions: List[Function] = []
    for plan, parts in zip(plans, part_families):
        for combo in product(*(part.functions for part in parts)):
            images = [0] * n
            for aug, g in zip(plan.augmented, combo):
                for j, x in enumerate(aug):
                    images[x] = g.images[j]
            functions.append(make_function(n, 2, images))
    return functions, sizes


@lru_cache(maxsize=256)
def _interval_part(u: int, b: int, fraction: Fraction, config: BuildConfig) -> Family:
    return alpha_bisector(u, b, fraction, config, certify=False)


def interval_shape(k: int) -> Tuple[int, int]:
    """(number of intervals, per-interval budget) = (ceil(k^(2/3)), ceil(k^(1/3)))."""
    if k == 0:
        return 1, 0
    pieces = 1
    while pieces ** 3 < k * k:
        pieces += 1
    budget = 1
    while budget ** 3 < k:
        budget += 1
    return pieces, budget


def interval_bisector(
    n: int,
    k: int,
    alpha,
    config: Optional[BuildConfig] = None,
    intervals: Optional[int] = None,
    budget: Optional[int] = None,
    base_universe: Optional[int] = None,
    certify: bool = True,
) -> Family:
    """
    (n, k, alpha)-bisector as a union over interval plans.

    For each plan every augmented range gets an alpha_bisector for `budget`
    elements with its apportioned ones; all combinations are emitted. Some plan
    puts at most `budget` subset elements in every range and its reservoir
    outside the subset, so every k-subset is covered once the grid is fine
    enough. A coarse grid is checked by the oracle whether or not `certify`
    is set, and a grid that misses a subset is refined to step 1.

    Args:
        intervals, budget: Override ceil(k^(2/3)) and ceil(k^(1/3)).
        base_universe: Build on this smaller universe and lift with extend_modulo.

    Raises:
        GuessSpaceTooLarge: too many plans or functions.
        BadParams: n too small for the reservoir blocks.
    """
    config = config or DEFAULT_CONFIG
    alpha = as_fraction(alpha)
    if not 0 <= alpha < 1:
        raise BadParams(f"alpha must lie in [0, 1), got {alpha}")
    if k < 0 or k > n:
        raise BadParams(f"need 0 <= k <= n, got k={k}, n={n}")
    if base_universe and k <= base_universe < n:
        small = interval_bisector(base_universe, k, alpha, config, intervals, budget)
        return _finish(extend_modulo(small, n, k, certify=False), certify)
    total = ceil_fraction(alpha, n)
    if n - total < k:
        raise BadParams(f"ceil(alpha*n)={total} ones leave fewer than k={k} zeros on [{n}]")
    if total == 0 or k == 0:
        return _trivial_bisector(n, k, alpha, "interval_bisector")

    default_pieces, default_budget = interval_shape(k)
    pieces = intervals or default_pieces
    budget = budget or default_budget
    if pieces * budget < k:
        raise BadParams(f"{pieces} intervals x {budget} elements cannot hold k={k}")
    pad = minimal_pad(alpha, budget)
    reservoir = default_reservoir(n, k, pieces, pad, config)
    granularity = config.granularity or max(1, -(-n // (4 * k)))

    def build(step: int) -> Family:
        plans = enumerate_interval_plans(n, k, pieces, pad, reservoir, step, alpha, config)
        if not plans:
            raise BadParams(f"no interval plan gives every range at least {pad} elements")
        functions, sizes = combine_plans(
            n, plans, lambda u, f: _interval_part(u, budget, f, config), config
        )
        return make_family(
            "bisector", n, k, functions,
            alpha=alpha,
            regime=_regime_flags(n, k),
            provenance={
                "builder": "interval_bisector",
                "guesses": str(len(plans)),
                "per_guess_min": str(min(sizes)),
                "per_guess_max": str(max(sizes)),
                "intervals": str(pieces),
                "budget": str(budget),
                "reservoir": str(reservoir),
                "granularity": str(step),
            },
        )

    family = build(granularity)
    if granularity > 1 and not verify_bisector(family, k, alpha).valid:
        logger.warning("Interval grid step %d misses a subset; refining to step 1", granularity)
        family = build(1)
    return _finish(family, certify)


# --- lower bound -------------------------------------------------------------------

class AdversaryResult(NamedTuple):
    witness: Tuple[int, ...]
    surviving: int


def adversary_lower_bound(family: Family, k: int) -> AdversaryResult:
    """
    Greedy adversary: k times, add the element that is 1 under the most
    surviving functions and keep only functions that are 0 on it.

    A valid bisector always keeps at least one survivor; for alpha = 1/2 each
    pick removes at least half of the survivors, which certifies |F| >= 2^k.
    """
    if not family.functions:
        raise BadParams("adversary_lower_bound needs a nonempty family")
    if k > family.n:
        raise BadParams(f"k={k} exceeds n={family.n}")
    surviving = list(family.functions)
    chosen: List[int] = []
    for _ in range(k):
        best, best_hits = None, -1
        for x in range(family.n):
            if x in chosen:
                continue
            hits = sum(1 for f in surviving if f.images[x] == 1)
            if hits > best_hits:
                best, best_hits = x, hits
        chosen.append(best)
        surviving = [f for f in surviving if f.images[best] == 0]
    return AdversaryResult(tuple(sorted(chosen)), len(surviving))
