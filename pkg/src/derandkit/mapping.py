"""
Mapping families and universal sets.

An (n, k0, k1, alpha, beta)-mapping family is a list of binary functions on
[n], each with exactly ceil(alpha*n) ones, such that for every disjoint
(S0, S1) with |S0| = k0 and |S1| = k1 some member is 0 on S0 and 1 on exactly
ceil(beta*k1) elements of S1. The union of the beta = 1 families over all
k0 + k1 = k is a universal set.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

from derandkit.bisectors import (
    alpha_bisector,
    attach_on_zeros,
    combine_plans,
    default_reservoir,
    enumerate_interval_plans,
    interval_bisector,
    interval_shape,
    iteration_count,
    minimal_pad,
    stage_ones,
)
from derandkit.config import DEFAULT_CONFIG, BuildConfig
from derandkit.errors import (
    BadParams,
    BuildFailure,
    OracleRejected,
    RepairInfeasible,
    SizeMismatch,
    UniformityRequired,
    WindowFailure,
)
from derandkit.family import (
    Family,
    Function,
    as_fraction,
    ceil_fraction,
    compose,
    make_family,
    make_function,
    relabel_image,
)
from derandkit.greedy import binary_pool, greedy_cover, maps_pair, pair_targets
from derandkit.oracle import verify_mapping_family, verify_uniformity, verify_universal
from derandkit.splitters import build_splitter

logger = logging.getLogger(__name__)

SCHEDULE_PRECISION = 50
METHODS = ("iterated", "interval")


def _regime_flags(n: int, k: int) -> List[str]:
    flags = []
    if k < 16:
        flags.append("k_below_16")
    if n < k ** 4:
        flags.append("n_below_k4")
    return flags


def certify_mapping(family: Family) -> Family:
    report = verify_mapping_family(family, family.k0, family.k1, family.alpha, family.beta)
    if not report.valid:
        raise OracleRejected(
            f"mapping family n={family.n} k0={family.k0} k1={family.k1} "
            f"alpha={family.alpha} beta={family.beta} rejected, witness {report.witness_text()}",
            report,
        )
    return family


def _finish(family: Family, certify: bool) -> Family:
    if certify and (family.regime or family.provenance.get("pool") == "sampled"):
        certify_mapping(family)
    logger.info(
        "mapping n=%d k0=%d k1=%d alpha=%s beta=%s size=%d builder=%s",
        family.n, family.k0, family.k1, family.alpha, family.beta,
        len(family), family.provenance.get("builder"),
    )
    return family


def _as_mapping(bisector: Family, k0: int, builder: str) -> Family:
    """A (n, k0, alpha)-bisector is exactly an (n, k0, 0, alpha, 1)-mapping family."""
    return make_family(
        "mapping", bisector.n, k0, bisector.functions,
        alpha=bisector.alpha,
        beta=Fraction(1),
        k0=k0,
        k1=0,
        regime=bisector.regime,
        provenance={**bisector.provenance, "builder": builder, "delegated": "bisector"},
    )


# --- greedy base -------------------------------------------------------------------

def base_mapping_family(
    m: int,
    k0: int,
    k1: int,
    ones_fraction,
    beta,
    config: Optional[BuildConfig] = None,
    certify: bool = True,
) -> Family:
    """
    Greedy (m, k0, k1, fraction, beta)-mapping family.

    A candidate covers (S0, S1) when it is 0 on S0 and has exactly
    ceil(beta*k1) ones on S1. With beta = 0 this is the (m, k0+k1)-bisector
    predicate; with k1 = 0 it is the (m, k0)-bisector predicate.

    Raises:
        BadParams: fractions outside [0, 1], k0 + k1 > m, or the ones-count
            leaves no room for the required zeros or hits.
        PoolExhausted: a sampled pool cannot finish the cover.
    """
    config = config or DEFAULT_CONFIG
    fraction = as_fraction(ones_fraction)
    beta = as_fraction(beta)
    if not (0 <= fraction <= 1 and 0 <= beta <= 1):
        raise BadParams(f"fraction and beta must lie in [0, 1], got {fraction}, {beta}")
    if k0 < 0 or k1 < 0 or k0 + k1 > m:
        raise BadParams(f"need k0, k1 >= 0 and k0 + k1 <= m, got k0={k0}, k1={k1}, m={m}")
    ones = ceil_fraction(fraction, m)
    hits = ceil_fraction(beta, k1)
    if ones < hits:
        raise BadParams(f"{ones} ones cannot hit {hits} elements of S1")
    if m - ones < k0 + (k1 - hits):
        raise BadParams(
            f"{ones} ones on [{m}] leave fewer than {k0 + k1 - hits} zeros for S0 and missed S1"
        )
    pool, descriptor = binary_pool(m, ones, config)
    zeros, ones_idx = pair_targets(m, k0, k1)
    state = greedy_cover(
        pool, descriptor, zeros.shape[0], k0 + k1, maps_pair(zeros, ones_idx, hits), config
    )
    functions = [make_function(m, 2, row.tolist()) for row in state.chosen]
    family = make_family(
        "mapping", m, k0 + k1, functions,
        alpha=fraction,
        beta=beta,
        k0=k0,
        k1=k1,
        regime=_regime_flags(m, k0 + k1) if k0 + k1 else (),
        provenance={"builder": "base_mapping_family", **descriptor.as_provenance()},
        coverage_log=state.coverage_log,
    )
    return _finish(family, certify)


# --- splitter lift -----------------------------------------------------------------

def _blocks(items: Tuple[int, ...], parts: int) -> List[Tuple[int, ...]]:
    size, extra = divmod(len(items), parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out


def _repair(f: Function, target: int, k: int) -> List[Function]:
    """
    k+1 variants of f with exactly `target` ones.

    Excess ones are cleared inside one of k+1 disjoint blocks of f^-1(1),
    missing ones are set inside one of k+1 blocks of f^-1(0); the lowest
    elements of the block are flipped. Any k-subset misses one block, so one
    variant agrees with f on it.
    """
    delta = f.ones - target
    if delta == 0:
        return [f] * (k + 1)
    pool = f.ones_positions() if delta > 0 else f.zeros_positions()
    need = abs(delta)
    variants = []
    for block in _blocks(pool, k + 1):
        if len(block) < need:
            raise RepairInfeasible(
                f"repair block of {len(block)} elements cannot absorb a deviation of {need}"
            )
        images = list(f.images)
        for x in block[:need]:
            images[x] = 0 if delta > 0 else 1
        variants.append(make_function(f.n, 2, images))
    return variants


def lift_mapping_family(
    n: int,
    k: int,
    k0: int,
    k1: int,
    beta,
    splitter: Family,
    base: Union[Family, Mapping[int, Family]],
    certify: bool = True,
) -> Family:
    """
    Lift mapping families on small universes to [n] through a uniform splitter.

    Each splitter function g is relabelled onto its image [m] and composed with
    every member of the base family built for m. The composite has roughly
    fraction*n ones (g is uniform); the deviation from ceil(fraction*n) is
    repaired in k+1 variants. Every (S0, S1) with k0 + k1 <= k is injected by
    some g, covered by some base member, and left untouched by one variant.

    Args:
        base: One family (all images have its size) or a dict size -> family.

    Raises:
        UniformityRequired: the splitter is not uniform.
        SizeMismatch: splitter universe is not [n] or no base for an image size.
        RepairInfeasible: a repair block is too small.
    """
    beta = as_fraction(beta)
    if splitter.n != n:
        raise SizeMismatch(f"splitter is on [{splitter.n}], expected [{n}]")
    if k0 + k1 > k:
        raise BadParams(f"k0 + k1 = {k0 + k1} exceeds the splitter's k={k}")
    if not verify_uniformity(splitter, "uniform").valid:
        raise UniformityRequired("lift_mapping_family needs a uniform splitter")
    bases: Dict[int, Family] = {base.n: base} if isinstance(base, Family) else dict(base)
    if not bases:
        raise SizeMismatch("no base family given")
    first = next(iter(bases.values()))
    fraction = first.alpha
    for size, family in bases.items():
        if family.kind != "mapping" or family.n != size:
            raise SizeMismatch(f"base for size {size} is a {family.kind} family on [{family.n}]")
        if (family.k0, family.k1, family.alpha) != (k0, k1, fraction):
            raise BadParams(f"base for size {size} has mismatched parameters")
        if ceil_fraction(family.beta, k1) != ceil_fraction(beta, k1):
            raise BadParams(f"base for size {size} hits a different number of S1 elements")

    target = ceil_fraction(fraction, n)
    functions: List[Function] = []
    regime: List[str] = list(splitter.regime)
    for index, g in enumerate(splitter.functions):
        g1 = relabel_image(g)
        if g1.ell not in bases:
            raise SizeMismatch(f"splitter function {index} has image size {g1.ell} with no base")
        for b in bases[g1.ell].functions:
            functions.extend(_repair(compose(b, g1), target, k))
    for family in bases.values():
        regime.extend(family.regime)
    family = make_family(
        "mapping", n, k0 + k1, functions,
        alpha=fraction,
        beta=beta,
        k0=k0,
        k1=k1,
        regime=regime,
        provenance={
            "builder": "lift_mapping_family",
            "splitter_size": str(len(splitter)),
            "base_sizes": ",".join(f"{m}:{len(f)}" for m, f in sorted(bases.items())),
        },
    )
    return _finish(family, certify)


# --- beta schedule ---------------------------------------------------------------------

@dataclass(frozen=True)
class BetaSchedule:
    """
    How many S1 elements each stage of the iterated construction maps to 1.

    Attributes:
        t: Number of stages, ceil(sqrt(k) * ln(1/(1-alpha))).
        targets: Hits per stage; sums to k1.
        residuals: S1 elements still unmapped before each stage, then 0.
        betas: targets[i] / residuals[i] (1 when nothing is left).
    """

    k: int
    k1: int
    alpha: Fraction
    t: int
    targets: Tuple[int, ...]
    residuals: Tuple[int, ...]
    betas: Tuple[Fraction, ...]


def _geometric_weights(k: int, t: int) -> List[Decimal]:
    x = 1 / Decimal(k).sqrt()
    return [(-i * x).exp() for i in range(1, t + 1)]


def beta_schedule(k: int, k1: int, alpha) -> BetaSchedule:
    """
    Split k1 into t stage targets following the profile e^(-i/sqrt(k)).

    Each target is the ceiling of its normalized share, capped by what is
    left; the last target takes the remainder, so the sum is exactly k1.

    Raises:
        BadParams: alpha outside [0, 1), k1 outside [0, k], or k1 > 0 with t = 0.
    """
    alpha = as_fraction(alpha)
    if not 0 <= alpha < 1:
        raise BadParams(f"beta_schedule needs 0 <= alpha < 1, got {alpha}")
    if not 0 <= k1 <= k:
        raise BadParams(f"need 0 <= k1 <= k, got k1={k1}, k={k}")
    t = iteration_count(k, alpha)
    if k1 > 0 and t == 0:
        raise BadParams(f"no stages for k={k}, alpha={alpha}; cannot map {k1} elements to 1")
    targets: List[int] = []
    if t:
        with localcontext() as ctx:
            ctx.prec = SCHEDULE_PRECISION
            weights = _geometric_weights(k, t)
            total = sum(weights)
            remaining = k1
            for weight in weights[:-1]:
                share = Decimal(k1) * weight / total
                step = min(int(share.to_integral_value(rounding="ROUND_CEILING")), remaining)
                targets.append(step)
                remaining -= step
            targets.append(remaining)
    residuals = [k1]
    for step in targets:
        residuals.append(residuals[-1] - step)
    betas = tuple(
        Fraction(step, left) if left else Fraction(1) for step, left in zip(targets, residuals)
    )
    return BetaSchedule(k, k1, alpha, t, tuple(targets), tuple(residuals), betas)


class SumBounds(NamedTuple):
    geometric: Decimal
    geometric_bound: Decimal
    weighted: Decimal
    weighted_bound: Decimal
    constant: Decimal


def useful_sum_bounds(k: int, alpha) -> SumBounds:
    """
    The two sums behind the schedule, by direct summation, with their bounds.

    Over i = 1..t with x = 1/sqrt(k):
        sum e^(-ix)     <= 1 + alpha*sqrt(k)
        sum i e^(-ix)   >= -(1-alpha) k ln(1/(1-alpha)) + alpha (k + C),
    where C = e^(-x) / (1 - e^(-x))^2 - k.
    """
    alpha = as_fraction(alpha)
    if k < 1:
        raise BadParams(f"useful_sum_bounds needs k >= 1, got {k}")
    t = iteration_count(k, alpha)
    with localcontext() as ctx:
        ctx.prec = SCHEDULE_PRECISION
        a = Decimal(alpha.numerator) / Decimal(alpha.denominator)
        root = Decimal(k).sqrt()
        q = (-1 / root).exp()
        weights = _geometric_weights(k, t)
        geometric = sum(weights, Decimal(0))
        weighted = sum((i * w for i, w in enumerate(weights, start=1)), Decimal(0))
        constant = q / (1 - q) ** 2 - k
        log_term = -(1 - a).ln()
        return SumBounds(
            geometric=geometric,
            geometric_bound=1 + a * root,
            weighted=weighted,
            weighted_bound=-(1 - a) * k * log_term + a * (k + constant),
            constant=constant,
        )


# --- iterated construction ----------------------------------------------------------

def _lift_codomain(kk: int, z: int) -> int:
    return min(z - 1, max(kk ** 3, 4 * kk + 4))


def stage_mapping_family(
    z: int, k0: int, k1: int, ones: int, hits: int, config: BuildConfig
) -> Family:
    """
    (z, k0, k1, ones/z, hits/k1)-mapping family for one stage.

    Greedy on [z] when the candidate pool fits the budget; otherwise a uniform
    splitter into about (k0+k1)^3 values lifts greedy families on the image
    sizes. A failed lift falls back to the sampled greedy build.
    """
    fraction = Fraction(ones, z)
    beta = Fraction(hits, k1) if k1 else Fraction(1)
    kk = k0 + k1
    if math.comb(z, ones) <= config.exhaustive_limit or kk == 0:
        return base_mapping_family(z, k0, k1, fraction, beta, config, certify=False)
    try:
        splitter = build_splitter(z, kk, _lift_codomain(kk, z), "uniform", config)
        bases: Dict[int, Family] = {}
        for g in splitter.functions:
            m = len(g.image())
            if m not in bases:
                bases[m] = base_mapping_family(m, k0, k1, fraction, beta, config, certify=False)
        return lift_mapping_family(z, kk, k0, k1, beta, splitter, bases, certify=False)
    except (RepairInfeasible, WindowFailure, BuildFailure, BadParams) as exc:
        logger.warning("Splitter lift for stage on [%d] failed (%s); sampling directly", z, exc)
        return base_mapping_family(z, k0, k1, fraction, beta, config, certify=False)


def iterated_mapping_family(
    n: int,
    k0: int,
    k1: int,
    alpha,
    config: Optional[BuildConfig] = None,
    certify: bool = True,
) -> Family:
    """
    (n, k0, k1, alpha, 1)-mapping family by stacking stages.

    Stage i places about z/sqrt(k) ones on the current zero-set of size z and
    maps targets[i] of the still-unmapped S1 elements to 1; ones are held back
    so later stages can still reach their S1 elements. The final stage places
    whatever is left to reach ceil(alpha*n), so S1 ends all-one.

    Raises:
        BadParams: alpha outside [0, 1), or ceil(alpha*n) leaves too few zeros
            for S0 or too few ones for S1.
    """
    config = config or DEFAULT_CONFIG
    alpha = as_fraction(alpha)
    if not 0 <= alpha < 1:
        raise BadParams(f"alpha must lie in [0, 1), got {alpha}")
    k = k0 + k1
    if k0 < 0 or k1 < 0 or k > n:
        raise BadParams(f"need k0, k1 >= 0 and k0 + k1 <= n, got k0={k0}, k1={k1}, n={n}")
    total = ceil_fraction(alpha, n)
    if n - total < k0 or total < k1:
        raise BadParams(
            f"ceil(alpha*n)={total} ones on [{n}] cannot fit k0={k0} zeros and k1={k1} ones"
        )
    if k1 == 0:
        return _as_mapping(alpha_bisector(n, k0, alpha, config, certify), k0, "iterated_mapping_family")

    schedule = beta_schedule(k, k1, alpha)
    functions: List[Function] = [make_function(n, 2, [0] * n)]
    regime = _regime_flags(n, k)
    fractions: List[str] = []
    placed, z = 0, n
    for i, (hits, residual) in enumerate(zip(schedule.targets, schedule.residuals)):
        later = residual - hits
        if i == schedule.t - 1:
            w = total - placed
        else:
            w = max(min(stage_ones(z, k), total - placed - later), hits)
        stage = stage_mapping_family(z, k0, residual, w, hits, config)
        regime.extend(stage.regime)
        functions = attach_on_zeros(functions, stage)
        fractions.append(f"{w}/{z}")
        logger.debug(
            "iterated mapping stage %d: %d ones on %d, %d of %d S1 hits, %d tables",
            i + 1, w, z, hits, residual, len(functions),
        )
        placed += w
        z -= w
    family = make_family(
        "mapping", n, k, functions,
        alpha=alpha,
        beta=Fraction(1),
        k0=k0,
        k1=k1,
        regime=regime,
        provenance={
            "builder": "iterated_mapping_family",
            "stages": str(schedule.t),
            "stage_fractions": ",".join(fractions),
            "targets": ",".join(map(str, schedule.targets)),
        },
    )
    return _finish(family, certify)


# --- interval construction ------------------------------------------------------------

@lru_cache(maxsize=256)
def _mapping_part(u: int, b0: int, b1: int, fraction: Fraction, config: BuildConfig) -> Family:
    return iterated_mapping_family(u, b0, b1, fraction, config, certify=False)


def interval_mapping_family(
    n: int,
    k0: int,
    k1: int,
    alpha,
    config: Optional[BuildConfig] = None,
    certify: bool = True,
) -> Family:
    """
    (n, k0, k1, alpha, 1)-mapping family as a union over interval plans.

    The cut points of an S0 plan (ceil(k0^(2/3)) intervals) and an S1 plan
    (ceil(k1^(2/3)) intervals) are merged, so every range holds at most
    ceil(k0^(1/3)) elements of S0 and ceil(k1^(1/3)) of S1 in the right plan.
    Each augmented range gets an iterated mapping family for those budgets.
    A coarse grid that misses a pair is refined to step 1, with or without
    `certify`.

    Raises:
        GuessSpaceTooLarge: too many plans or functions.
        BadParams: n too small for the padded ranges and reservoir blocks.
    """
    config = config or DEFAULT_CONFIG
    alpha = as_fraction(alpha)
    if not 0 <= alpha < 1:
        raise BadParams(f"alpha must lie in [0, 1), got {alpha}")
    k = k0 + k1
    if k0 < 0 or k1 < 0 or k > n:
        raise BadParams(f"need k0, k1 >= 0 and k0 + k1 <= n, got k0={k0}, k1={k1}, n={n}")
    if k1 == 0:
        return _as_mapping(interval_bisector(n, k0, alpha, config, certify=certify), k0, "interval_mapping_family")
    total = ceil_fraction(alpha, n)
    if n - total < k0 or total < k1:
        raise BadParams(
            f"ceil(alpha*n)={total} ones on [{n}] cannot fit k0={k0} zeros and k1={k1} ones"
        )

    pieces0, b0 = interval_shape(k0)
    pieces1, b1 = interval_shape(k1)
    pieces = (pieces0 - 1) + (pieces1 - 1) + 1
    pad = minimal_pad(alpha, b0, b1)
    if pieces * pad > n:
        raise BadParams(f"n={n} below the minimum of {pieces * pad} for {pieces} padded ranges")
    reservoir = default_reservoir(n, k, pieces, pad, config)
    granularity = config.granularity or max(1, -(-n // (4 * k)))

    def build(step: int) -> Family:
        plans = enumerate_interval_plans(n, k, pieces, pad, reservoir, step, alpha, config)
        if not plans:
            raise BadParams(f"no interval plan gives every range at least {pad} elements")
        functions, sizes = combine_plans(
            n, plans, lambda u, f: _mapping_part(u, b0, b1, f, config), config
        )
        logger.info("interval mapping: %d plans, per-plan sizes %s", len(plans), sizes)
        return make_family(
            "mapping", n, k, functions,
            alpha=alpha,
            beta=Fraction(1),
            k0=k0,
            k1=k1,
            regime=_regime_flags(n, k),
            provenance={
                "builder": "interval_mapping_family",
                "guesses": str(len(plans)),
                "per_guess_min": str(min(sizes)),
                "per_guess_max": str(max(sizes)),
                "intervals": str(pieces),
                "budgets": f"{b0},{b1}",
                "reservoir": str(reservoir),
                "granularity": str(step),
            },
        )

    family = build(granularity)
    if granularity > 1 and not verify_mapping_family(family, k0, k1, alpha, 1).valid:
        logger.warning("Interval grid step %d misses a pair; refining to step 1", granularity)
        family = build(1)
    return _finish(family, certify)


# --- universal sets ---------------------------------------------------------------------

def certify_universal(family: Family) -> Family:
    report = verify_universal(family, family.k, family.alpha)
    if not report.valid:
        raise OracleRejected(
            f"universal set n={family.n} k={family.k} alpha={family.alpha} rejected, "
            f"witness {report.witness_text()}",
            report,
        )
    return family


def universal_set(
    n: int,
    k: int,
    alpha,
    config: Optional[BuildConfig] = None,
    method: str = "iterated",
    certify: bool = True,
) -> Family:
    """
    (n, k, alpha)-universal set: the union of the (n, k0, k-k0, alpha, 1)
    mapping families for k0 = 0..k, built concurrently and merged in k0 order.
    Exact duplicates are dropped, first occurrence wins.

    Raises:
        BadParams: unknown method or parameters no mapping family accepts.
    """
    config = config or DEFAULT_CONFIG
    alpha = as_fraction(alpha)
    if method not in METHODS:
        raise BadParams(f"unknown universal-set method {method!r}; choose from {', '.join(METHODS)}")
    if not 0 <= k <= n:
        raise BadParams(f"need 0 <= k <= n, got k={k}, n={n}")
    builder = iterated_mapping_family if method == "iterated" else interval_mapping_family
    splits = [(k0, k - k0) for k0 in range(k + 1)]

    def build(split: Tuple[int, int]) -> Family:
        k0, k1 = split
        return builder(n, k0, k1, alpha, config, certify=False)

    if config.workers > 1 and len(splits) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            parts = list(executor.map(build, splits))
    else:
        parts = [build(split) for split in splits]

    functions: List[Function] = []
    seen = set()
    regime: List[str] = []
    for part in parts:
        regime.extend(part.regime)
        for f in part.functions:
            if f.images not in seen:
                seen.add(f.images)
                functions.append(f)
    family = make_family(
        "universal", n, k, functions,
        alpha=alpha,
        regime=regime,
        provenance={
            "builder": "universal_set",
            "method": method,
            "part_sizes": ",".join(str(len(part)) for part in parts),
        },
    )
    if certify:
        certify_universal(family)
    logger.info(
        "universal set n=%d k=%d alpha=%s size=%d (parts %s)",
        n, k, alpha, len(family), family.provenance["part_sizes"],
    )
    return family
