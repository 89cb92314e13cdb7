"""
Brute-force oracles.

Each verifier checks a family directly against its definition and never
raises on an invalid family: it returns a VerifyReport with the first witness
in colexicographic order. Binary functions are compared as Python bitmasks;
this code shares nothing with the builders' numpy predicates.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from derandkit.family import Family, ceil_fraction, image_histogram

logger = logging.getLogger(__name__)

UNIFORMITY_MODES = ("uniform", "a_uniform", "strong")


@dataclass(frozen=True)
class VerifyReport:
    """
    Oracle verdict.

    Attributes:
        valid: True iff no witness was found.
        checked: Number of target objects examined.
        witness: First failing subset, (S0, S1) pair, or function index.
        witness_kind: "subset", "pair" or "function" (None when valid).
        stats: Cover multiplicity -> number of targets with that multiplicity.
        sampled: True when only a random sample of targets was examined.
    """

    valid: bool
    checked: int
    witness: Optional[tuple] = None
    witness_kind: Optional[str] = None
    stats: Dict[int, int] = field(default_factory=dict)
    sampled: bool = False

    def witness_text(self) -> str:
        if self.witness is None:
            return "none"
        if self.witness_kind == "function":
            return f"function:{self.witness[0]}"
        if self.witness_kind == "pair":
            zeros, ones = self.witness
            return ",".join(map(str, zeros)) + "|" + ",".join(map(str, ones))
        return ",".join(map(str, self.witness))

    def result_line(self) -> str:
        return (
            f"RESULT valid={'true' if self.valid else 'false'} "
            f"checked={self.checked} witness={self.witness_text()}"
        )


# --- enumeration -------------------------------------------------------------

def colex_subsets(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """k-subsets of [n] in colexicographic order (ordered by largest element first)."""
    if k == 0:
        yield ()
        return
    for top in range(k - 1, n):
        for rest in colex_subsets(top, k - 1):
            yield rest + (top,)


def _sampled_subsets(n: int, k: int, sample: int, seed: int) -> Iterator[Tuple[int, ...]]:
    rng = np.random.default_rng(seed)
    for _ in range(sample):
        yield tuple(sorted(int(x) for x in rng.choice(n, size=k, replace=False)))


def _subsets(n: int, k: int, sample: Optional[int], seed: int) -> Iterator[Tuple[int, ...]]:
    if sample is None:
        return colex_subsets(n, k)
    return _sampled_subsets(n, k, sample, seed)


def _mask(elements: Sequence[int]) -> int:
    value = 0
    for x in elements:
        value |= 1 << x
    return value


def _ones_masks(family: Family) -> List[int]:
    return [_mask(x for x, v in enumerate(f.images) if v == 1) for f in family.functions]


def _ones_count_witness(family: Family, alpha) -> Optional[int]:
    target = ceil_fraction(alpha, family.n)
    for index, f in enumerate(family.functions):
        if sum(1 for v in f.images if v == 1) != target or any(v > 1 for v in f.images):
            return index
    return None


def _report(checked, witness, kind, stats, sampled) -> VerifyReport:
    return VerifyReport(
        valid=witness is None,
        checked=checked,
        witness=witness,
        witness_kind=None if witness is None else kind,
        stats=dict(sorted(stats.items())),
        sampled=sampled,
    )


# --- splitters -----------------------------------------------------------------

def _splits_evenly(images: Sequence[int], subset: Sequence[int], k: int, ell: int) -> bool:
    low, high = k // ell, -(-k // ell)
    counts = Counter(images[x] for x in subset)
    if high == 1:
        return len(counts) == k
    if low > 0 and len(counts) < ell:
        return False
    return all(low <= c <= high for c in counts.values())


def verify_splitter(
    family: Family, k: int, sample: Optional[int] = None, seed: int = 0
) -> VerifyReport:
    """Every k-subset must be split as evenly as possible by some member."""
    tables = [f.images for f in family.functions]
    stats: Counter = Counter()
    witness = None
    checked = 0
    for subset in _subsets(family.n, k, sample, seed):
        checked += 1
        hits = sum(1 for images in tables if _splits_evenly(images, subset, k, family.ell))
        stats[hits] += 1
        if hits == 0 and witness is None:
            witness = subset
    return _report(checked, witness, "subset", stats, sample is not None)


def verify_uniformity(family: Family, mode: str, a: Optional[int] = None) -> VerifyReport:
    """
    Per-function preimage checks.

    uniform: sizes within floor/ceil of n/|Im f| over Im f.
    a_uniform: pairwise gap <= a over Im f, and each size within
        [floor(n/|Im f|) - a, ceil(n/|Im f|) + a].
    strong: sizes within floor/ceil of n/ell over all of [ell].
    """
    if mode not in UNIFORMITY_MODES:
        raise ValueError(f"unknown uniformity mode {mode!r}")
    if mode == "a_uniform" and a is None:
        raise ValueError("a_uniform mode needs a")
    n = family.n
    for index, f in enumerate(family.functions):
        histogram = image_histogram(f)
        if mode == "strong":
            sizes, low, high = histogram, n // f.ell, -(-n // f.ell)
        else:
            sizes = [c for c in histogram if c > 0]
            width = len(sizes) or 1
            low, high = n // width, -(-n // width)
            if mode == "a_uniform":
                if sizes and max(sizes) - min(sizes) > a:
                    return _report(len(family), (index,), "function", {}, False)
                low, high = low - a, high + a
        if any(c < low or c > high for c in sizes):
            return _report(len(family), (index,), "function", {}, False)
    return _report(len(family), None, "function", {}, False)


# --- binary families -----------------------------------------------------------

def verify_bisector(
    family: Family, k: int, alpha, sample: Optional[int] = None, seed: int = 0
) -> VerifyReport:
    """Exact ones-count per member, and every k-subset all-zero under some member."""
    bad = _ones_count_witness(family, alpha)
    if bad is not None:
        return _report(0, (bad,), "function", {}, sample is not None)
    masks = _ones_masks(family)
    stats: Counter = Counter()
    witness = None
    checked = 0
    for subset in _subsets(family.n, k, sample, seed):
        checked += 1
        s = _mask(subset)
        hits = sum(1 for m in masks if m & s == 0)
        stats[hits] += 1
        if hits == 0 and witness is None:
            witness = subset
    return _report(checked, witness, "subset", stats, sample is not None)


def verify_mapping_family(
    family: Family,
    k0: int,
    k1: int,
    alpha,
    beta,
    sample: Optional[int] = None,
    seed: int = 0,
) -> VerifyReport:
    """Every disjoint (S0, S1): some member zero on S0 with exactly ceil(beta*k1) ones on S1."""
    bad = _ones_count_witness(family, alpha)
    if bad is not None:
        return _report(0, (bad,), "function", {}, sample is not None)
    hits_needed = ceil_fraction(beta, k1)
    masks = _ones_masks(family)
    stats: Counter = Counter()
    witness = None
    checked = 0
    for support in _subsets(family.n, k0 + k1, sample, seed):
        for ones in combinations(support, k1):
            chosen = set(ones)
            zeros = tuple(x for x in support if x not in chosen)
            z, o = _mask(zeros), _mask(ones)
            checked += 1
            hits = sum(1 for m in masks if m & z == 0 and bin(m & o).count("1") == hits_needed)
            stats[hits] += 1
            if hits == 0 and witness is None:
                witness = (zeros, ones)
    return _report(checked, witness, "pair", stats, sample is not None)


def verify_universal(
    family: Family, k: int, alpha, sample: Optional[int] = None, seed: int = 0
) -> VerifyReport:
    """Every k-subset and every 0/1 split of it realized by some member."""
    bad = _ones_count_witness(family, alpha)
    if bad is not None:
        return _report(0, (bad,), "function", {}, sample is not None)
    masks = _ones_masks(family)
    stats: Counter = Counter()
    witness = None
    checked = 0
    for subset in _subsets(family.n, k, sample, seed):
        s = _mask(subset)
        for pattern in range(1 << k):
            ones = tuple(x for bit, x in enumerate(subset) if pattern >> bit & 1)
            o = _mask(ones)
            checked += 1
            hits = sum(1 for m in masks if m & s == o)
            stats[hits] += 1
            if hits == 0 and witness is None:
                zeros = tuple(x for x in subset if not (o >> x) & 1)
                witness = (zeros, ones)
    return _report(checked, witness, "pair", stats, sample is not None)


def expected_checks(kind: str, n: int, k: int, k0: int = 0, k1: int = 0) -> int:
    """Number of targets an exhaustive oracle examines."""
    if kind == "universal":
        return math.comb(n, k) * 2 ** k
    if kind == "mapping":
        return math.comb(n, k0 + k1) * math.comb(k0 + k1, k1)
    return math.comb(n, k)
