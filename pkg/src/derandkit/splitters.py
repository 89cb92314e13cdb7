"""
Splitter constructions.

- modulo_splitter: x -> x mod m for each prime m of a CRT window.
- composed_splitter: a modulo splitter into an intermediate codomain followed
  by a modulo splitter of that codomain into [ell].
- brute_force_splitter: greedy cover over strongly balanced functions.
- smooth: turn an a-uniform splitter into a uniform one, (k+1) functions per input.
- build_splitter: the dispatcher choosing among the above.

Families built with parameters below the asymptotic thresholds carry regime
flags and are only returned after the exhaustive oracle accepts them.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from derandkit.config import DEFAULT_CONFIG, BuildConfig
from derandkit.errors import (
    BadParams,
    BuildFailure,
    NonuniformityExceeded,
    OracleRejected,
    PreconditionFailed,
    WindowFailure,
)
from derandkit.family import (
    Family,
    Function,
    compose,
    identity_function,
    image_histogram,
    make_family,
    make_function,
    modulo_function,
    nonuniformity,
    relabel_image,
    with_codomain,
)
from derandkit.greedy import balanced_pool, greedy_cover, index_array, injective_on, subset_targets
from derandkit.oracle import verify_splitter, verify_uniformity
from derandkit.primes import prime_window

logger = logging.getLogger(__name__)

GOALS = ("none", "a-uniform", "uniform", "strong")


def _check_basic(n: int, k: int, ell: int) -> None:
    if k < 1 or n < k:
        raise BadParams(f"need n >= k >= 1, got n={n}, k={k}")
    if ell < k:
        raise BadParams(f"ell={ell} < k={k}: no function can be injective on a {k}-subset")


def classify_uniformity(functions: Sequence[Function], n: int, ell: int) -> str:
    """Strongest uniformity class shared by all functions."""
    if not functions:
        return "strong"
    low, high = n // ell, -(-n // ell)
    if all(low <= c <= high for f in functions for c in image_histogram(f)):
        return "strong"
    gap = max(nonuniformity(f) for f in functions)
    if gap <= 1:
        return "uniform"
    return f"a-uniform({gap})"


def certify_splitter(family: Family) -> Family:
    """Run the exhaustive oracle; raise OracleRejected if it finds a witness."""
    report = verify_splitter(family, family.k)
    if not report.valid:
        raise OracleRejected(
            f"splitter n={family.n} k={family.k} ell={family.ell} rejected, "
            f"witness {report.witness}",
            report,
        )
    return family


def _needs_certificate(family: Family) -> bool:
    return bool(family.regime) or family.provenance.get("pool") == "sampled"


def _finish(family: Family, certify: bool) -> Family:
    if certify and _needs_certificate(family):
        certify_splitter(family)
    logger.info(
        "splitter n=%d k=%d ell=%d size=%d uniformity=%s regime=%s",
        family.n, family.k, family.ell, len(family), family.uniformity,
        ",".join(family.regime) or "in",
    )
    return family


# --- modulo splitter ---------------------------------------------------------

def modulo_splitter(
    n: int, k: int, ell: int, config: Optional[BuildConfig] = None, certify: bool = True
) -> Family:
    """
    One function x -> x mod m per modulus m of the prime window.

    Args:
        n: Universe size.
        k: Subset size.
        ell: Codomain size; every modulus is <= min(ell, n).

    Returns:
        Uniform splitter family of kind splitter.

    Raises:
        BadParams: ell < k.
        WindowFailure: no prime window reaches CRT capacity.
    """
    _check_basic(n, k, ell)
    regime: List[str] = []
    if k == 1:
        moduli: Tuple[int, ...] = (min(ell, n),)
        regime.append("k_below_8")
    else:
        window = prime_window(n, k, ell)
        moduli = window.moduli
        if k < 8:
            regime.append("k_below_8")
        if ell < k * k * math.log2(n):
            regime.append("ell_below_k2_log_n")
        if not window.in_regime:
            regime.append("window_widened")
    functions = [modulo_function(n, m, ell) for m in moduli]
    family = make_family(
        "splitter", n, k, functions,
        ell=ell,
        uniformity=classify_uniformity(functions, n, ell),
        regime=regime,
        provenance={"builder": "modulo_splitter", "moduli": ",".join(map(str, moduli))},
    )
    return _finish(family, certify)


# --- two-level composition ---------------------------------------------------

def intermediate_codomain(n: int, k: int, ell: int, config: BuildConfig) -> int:
    """floor(2^(ell/k^2)) capped at n and at config.max_intermediate."""
    k2 = k * k
    cap = max(1, min(n, config.max_intermediate))
    if ell // k2 >= cap.bit_length():
        return cap
    power = 1 << ell
    value = max(1, int(2 ** (ell / k2)))
    while (value + 1) ** k2 <= power:
        value += 1
    while value > 1 and value ** k2 > power:
        value -= 1
    return min(value, cap)


def composed_nonuniformity_bound(n: int, k: int, ell: int) -> Optional[int]:
    """ceil(n / (2^(ell/k^2) - k^2 log2(n) / 2)), or None when the denominator is not positive."""
    denominator = 2 ** (ell / (k * k)) - k * k * math.log2(n) / 2
    if denominator <= 0:
        return None
    return math.ceil(n / denominator)


def composed_splitter(
    n: int,
    k: int,
    ell: int,
    config: Optional[BuildConfig] = None,
    intermediate: Optional[int] = None,
    certify: bool = True,
) -> Family:
    """
    Compose an (n, k, ell')-modulo splitter with (ell', k, ell)-modulo splitters.

    Each outer function x -> x mod m' is followed by every function of a modulo
    splitter of [m'] into [ell]. If the intermediate codomain does not exceed
    ell the outer stage alone is returned.

    Args:
        intermediate: Explicit ell'; defaults to floor(2^(ell/k^2)) with caps.

    Raises:
        BadParams: ell < k, or ell < k^3 without allow_out_of_regime or an
            explicit intermediate codomain.
    """
    config = config or DEFAULT_CONFIG
    _check_basic(n, k, ell)
    regime: List[str] = []
    if ell < k ** 3:
        if not config.allow_out_of_regime and intermediate is None:
            raise BadParams(
                f"composed_splitter needs ell >= k^3 ({k ** 3}); got ell={ell}. "
                "Enable allow_out_of_regime for desk-scale runs."
            )
        regime.append("ell_below_k3")
    inter = intermediate if intermediate is not None else intermediate_codomain(n, k, ell, config)
    inter = min(inter, n)

    if inter <= ell:
        direct = modulo_splitter(n, k, ell, config, certify=False)
        functions = list(direct.functions)
        regime.extend(direct.regime)
        branch = "direct"
    else:
        outer = modulo_splitter(n, k, inter, config, certify=False)
        regime.extend(outer.regime)
        inner_cache: Dict[int, Family] = {}
        functions = []
        for f1 in outer.functions:
            g1 = relabel_image(f1)
            m = g1.ell
            if m < k:
                continue
            if m <= ell:
                functions.append(with_codomain(g1, ell))
                continue
            if m not in inner_cache:
                inner_cache[m] = modulo_splitter(m, k, ell, config, certify=False)
                regime.extend(inner_cache[m].regime)
            functions.extend(compose(f2, g1) for f2 in inner_cache[m].functions)
        branch = "two_level"

    measured = max((nonuniformity(f) for f in functions), default=0)
    bound = composed_nonuniformity_bound(n, k, ell)
    if k < 8:
        regime.append("k_below_8")
    if not regime and bound is not None and measured > bound:
        raise NonuniformityExceeded(
            f"composed nonuniformity {measured} exceeds the in-regime bound {bound}"
        )
    family = make_family(
        "splitter", n, k, functions,
        ell=ell,
        uniformity=classify_uniformity(functions, n, ell),
        regime=regime,
        provenance={
            "builder": "composed_splitter",
            "branch": branch,
            "intermediate": str(inter),
            "nonuniformity_measured": str(measured),
            "nonuniformity_bound": "none" if bound is None else str(bound),
        },
    )
    return _finish(family, certify)


# --- greedy over balanced functions -----------------------------------------

def injective_progress_bound(ell: int, k: int) -> float:
    """((ell - k) / ell)^k, the per-round coverage fraction a full pool guarantees."""
    return ((ell - k) / ell) ** k


def brute_force_splitter(
    t: int,
    k: int,
    ell: int,
    subsets: Optional[Sequence[Sequence[int]]] = None,
    config: Optional[BuildConfig] = None,
    certify: bool = True,
) -> Family:
    """
    Greedy cover of k-subsets of [t] by strongly balanced functions [t] -> [ell].

    Args:
        t: Universe size.
        subsets: Optional explicit target k-subsets; all k-subsets by default.

    Returns:
        Strongly uniform splitter family with its coverage log attached.

    Raises:
        PoolExhausted: the (sampled) pool cannot finish the cover.
    """
    config = config or DEFAULT_CONFIG
    _check_basic(t, k, ell)
    if subsets is None:
        targets = subset_targets(t, k)
    else:
        targets = index_array([sorted(s) for s in subsets], k)
    pool, descriptor = balanced_pool(t, ell, config)
    state = greedy_cover(pool, descriptor, targets.shape[0], k, injective_on(targets), config)
    if descriptor.mode == "full" and k <= ell:
        bound = injective_progress_bound(ell, k)
        slow = sum(1 for step in state.coverage_log if step.fraction < bound)
        if slow:
            logger.warning("%d greedy rounds on [%d]->[%d] fell below the progress bound %.4f", slow, t, ell, bound)
    functions = [make_function(t, ell, row.tolist()) for row in state.chosen]
    regime = ["ell_below_k2"] if ell < k * k else []
    provenance = {"builder": "brute_force_splitter", **descriptor.as_provenance()}
    family = make_family(
        "splitter", t, k, functions,
        ell=ell,
        uniformity="strong",
        regime=regime,
        provenance=provenance,
        coverage_log=state.coverage_log,
    )
    return _finish(family, certify and subsets is None)


# --- smoothing ---------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingTable:
    """
    Column view of one function: column i lists f^-1(values[i]) ascending.

    The first k stripes split rows [0, h) into near-equal heights, the last
    stripe holds every row at or above h.
    """

    values: Tuple[int, ...]
    columns: Tuple[Tuple[int, ...], ...]
    h: int
    stripes: Tuple[Tuple[int, int], ...]


def build_smoothing_table(f: Function, k: int) -> SmoothingTable:
    by_value: Dict[int, List[int]] = {}
    for x, value in enumerate(f.images):
        by_value.setdefault(value, []).append(x)
    values = tuple(sorted(by_value))
    columns = tuple(tuple(by_value[v]) for v in values)
    h = min(len(column) for column in columns)
    top = max(len(column) for column in columns)
    base, extra = divmod(h, k)
    stripes: List[Tuple[int, int]] = []
    low = 0
    for j in range(k):
        high = low + base + (1 if j < extra else 0)
        stripes.append((low, high))
        low = high
    stripes.append((h, max(top, h)))
    return SmoothingTable(values=values, columns=columns, h=h, stripes=tuple(stripes))


def _redistribute(f: Function, table: SmoothingTable, stripe: Tuple[int, int]) -> Function:
    low, high = stripe
    count = len(table.columns)
    q, r = divmod(f.n, count)
    kept = [len(col) - len(col[low:high]) for col in table.columns]
    free = sorted(x for col in table.columns for x in col[low:high])
    order = sorted(range(count), key=lambda i: (-len(table.columns[i]), i))
    target = [q] * count
    for i in order[:r]:
        target[i] = q + 1
    images = list(f.images)
    pointer = 0
    for i in range(count):
        deficit = target[i] - kept[i]
        if deficit < 0:
            raise NonuniformityExceeded(
                f"column {table.values[i]} keeps {kept[i]} elements above its target {target[i]}"
            )
        for x in free[pointer : pointer + deficit]:
            images[x] = table.values[i]
        pointer += deficit
    return make_function(f.n, f.ell, images)


def smooth(family: Family, a: int, certify: bool = True) -> Family:
    """
    Uniform splitter from an a-uniform one: k+1 functions per input function.

    For each input function and each stripe of its table, the stripe's
    elements are handed to deficient columns in ascending order (lowest column
    first). A k-subset misses at least one stripe; the function built from that
    stripe agrees with the input on the subset.

    Raises:
        PreconditionFailed: n < a * ell * (k + 1).
        NonuniformityExceeded: some input function is not a-uniform.
    """
    if family.kind != "splitter":
        raise BadParams(f"smooth expects a splitter family, got {family.kind}")
    if a < 0:
        raise BadParams(f"a must be non-negative, got {a}")
    n, k, ell = family.n, family.k, family.ell
    if n < a * ell * (k + 1):
        raise PreconditionFailed(
            f"smoothing needs n >= a*ell*(k+1) = {a * ell * (k + 1)}, got n={n}"
        )
    measured = max((nonuniformity(f) for f in family.functions), default=0)
    if measured > a:
        raise NonuniformityExceeded(f"family is {measured}-uniform, not {a}-uniform")

    functions: List[Function] = []
    for f in family.functions:
        table = build_smoothing_table(f, k)
        shortest = min(high - low for low, high in table.stripes[:k]) if k else table.h
        feasible = table.h >= a * k and shortest >= a
        logger.log(
            logging.DEBUG if feasible else logging.WARNING,
            "smoothing table: h=%d (a*k=%d), shortest stripe %d (a=%d), columns=%d",
            table.h, a * k, shortest, a, len(table.columns),
        )
        functions.extend(_redistribute(f, table, stripe) for stripe in table.stripes)
    result = make_family(
        "splitter", n, k, functions,
        ell=ell,
        uniformity=classify_uniformity(functions, n, ell),
        regime=family.regime,
        provenance={**family.provenance, "smoothed": str(a)},
    )
    return _finish(result, certify)


# --- dispatcher --------------------------------------------------------------

def _is_uniform(family: Family) -> bool:
    return all(nonuniformity(f) <= 1 for f in family.functions)


def _brute_force_fallback(n: int, k: int, ell: int, config: BuildConfig) -> Family:
    logger.warning("No prime window for n=%d k=%d ell=%d; using the greedy splitter", n, k, ell)
    return brute_force_splitter(n, k, ell, config=config, certify=False)


def _large_k_branch(n: int, k: int, ell: int, config: BuildConfig) -> Tuple[Family, str]:
    try:
        if ell >= k ** 3 or config.allow_out_of_regime:
            return composed_splitter(n, k, ell, config, certify=False), "composed"
        return modulo_splitter(n, k, ell, config, certify=False), "modulo"
    except WindowFailure:
        return _brute_force_fallback(n, k, ell, config), "brute_force_fallback"


def _small_k_branch(
    n: int, k: int, ell: int, loglog: float, config: BuildConfig
) -> Tuple[Family, str]:
    inter = min(math.ceil(loglog ** 6), n, config.max_intermediate)
    regime: List[str] = []
    try:
        if inter >= n:
            outer_functions: Sequence[Function] = [identity_function(n)]
        elif inter >= k ** 3:
            outer = composed_splitter(n, k, inter, config, certify=False)
            outer_functions, regime = outer.functions, list(outer.regime)
        else:
            outer = modulo_splitter(n, k, inter, config, certify=False)
            outer_functions, regime = outer.functions, list(outer.regime)
    except WindowFailure:
        return _brute_force_fallback(n, k, ell, config), "brute_force_fallback"

    inner_cache: Dict[int, Family] = {}
    functions: List[Function] = []
    provenance: Dict[str, str] = {}
    for f1 in outer_functions:
        g1 = relabel_image(f1)
        m = g1.ell
        if m < k:
            continue
        if m <= ell:
            functions.append(with_codomain(g1, ell))
            continue
        if m not in inner_cache:
            inner_cache[m] = brute_force_splitter(m, k, ell, config=config, certify=False)
            regime.extend(inner_cache[m].regime)
            provenance.update(inner_cache[m].provenance)
        functions.extend(compose(f2, g1) for f2 in inner_cache[m].functions)
    provenance["builder"] = "build_splitter"
    family = make_family(
        "splitter", n, k, functions,
        ell=ell,
        uniformity=classify_uniformity(functions, n, ell),
        regime=regime + ["k_below_8"],
        provenance=provenance,
    )
    return family, "composed+brute_force"


def _make_uniform(family: Family, config: BuildConfig) -> Tuple[Family, str]:
    n, k, ell = family.n, family.k, family.ell
    a = max(nonuniformity(f) for f in family.functions)
    if n >= a * ell * (k + 1):
        return smooth(family, a, certify=False), "+smooth"
    logger.warning(
        "Cannot smooth a %d-uniform splitter with n=%d < a*ell*(k+1); using the modulo splitter",
        a, n,
    )
    try:
        return modulo_splitter(n, k, ell, config, certify=False), "+modulo_fallback"
    except WindowFailure:
        return _brute_force_fallback(n, k, ell, config), "+brute_force_fallback"


def build_splitter(
    n: int,
    k: int,
    ell: int,
    goal: str = "uniform",
    config: Optional[BuildConfig] = None,
    certify: bool = True,
) -> Family:
    """
    Build an (n, k, ell)-splitter of the requested uniformity class.

    Branches:
        identity: ell >= n, the identity table alone.
        brute_force: goal == "strong" (only balanced functions are strongly uniform).
        composed / modulo: k >= log2 log2 n.
        composed+brute_force: k < log2 log2 n; a splitter into ell' =
            ceil((log2 log2 n)^6) followed by greedy splitters of [ell'].
    A "+smooth" suffix means the smoothing step ran to reach goal="uniform".

    Raises:
        BadParams: ell < k or unknown goal.
        BuildFailure: the requested class could not be reached.
    """
    config = config or DEFAULT_CONFIG
    if goal not in GOALS:
        raise BadParams(f"unknown uniformity goal {goal!r}; choose from {', '.join(GOALS)}")
    _check_basic(n, k, ell)

    if ell >= n:
        identity = identity_function(n, ell)
        family = make_family(
            "splitter", n, k, [identity],
            ell=ell,
            uniformity=classify_uniformity([identity], n, ell),
            provenance={"builder": "build_splitter"},
        )
        branch = "identity"
    elif goal == "strong":
        family, branch = brute_force_splitter(n, k, ell, config=config, certify=False), "brute_force"
    else:
        loglog = math.log2(math.log2(n)) if n > 2 else 0.0
        if k >= loglog:
            family, branch = _large_k_branch(n, k, ell, config)
        else:
            family, branch = _small_k_branch(n, k, ell, loglog, config)
        if goal == "uniform" and not _is_uniform(family):
            family, suffix = _make_uniform(family, config)
            branch += suffix

    family = make_family(
        "splitter", n, k, family.functions,
        ell=ell,
        uniformity=classify_uniformity(family.functions, n, ell),
        regime=family.regime,
        provenance={**family.provenance, "builder": "build_splitter", "branch": branch},
        coverage_log=family.coverage_log,
    )
    wanted = {"uniform": "uniform", "strong": "strong"}.get(goal)
    if wanted is not None and not verify_uniformity(family, wanted).valid:
        raise BuildFailure(f"branch {branch} did not reach {goal} uniformity")
    return _finish(family, certify)
