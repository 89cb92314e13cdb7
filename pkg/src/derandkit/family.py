"""
Functions and families of functions.

A Function is a total table [n] -> [ell] (0-based on both sides). A Family is an
ordered list of Functions with the parameters it was built for. Both are
immutable, so families can be shared freely across worker threads.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from derandkit.errors import (
    BadParams,
    CodomainMismatch,
    ImageOutOfRange,
    LengthMismatch,
)

KINDS = ("splitter", "bisector", "mapping", "universal")
BINARY_KINDS = ("bisector", "mapping", "universal")


@dataclass(frozen=True)
class Function:
    """A total map [n] -> [ell] stored as its image table."""

    n: int
    ell: int
    images: Tuple[int, ...]
    ones: Optional[int] = None

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, x: int) -> int:
        return self.images[x]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.images, dtype=np.int64)

    def ones_positions(self) -> Tuple[int, ...]:
        return tuple(x for x, value in enumerate(self.images) if value == 1)

    def zeros_positions(self) -> Tuple[int, ...]:
        return tuple(x for x, value in enumerate(self.images) if value == 0)

    def image(self) -> Tuple[int, ...]:
        """Sorted distinct values actually taken."""
        return tuple(sorted(set(self.images)))


def make_function(n: int, ell: int, images: Iterable[int]) -> Function:
    """
    Validate and freeze an image table.

    Args:
        n: Universe size.
        ell: Codomain size.
        images: n values, each in [0, ell).

    Returns:
        The Function; for ell == 2 the ones-count is cached.

    Raises:
        LengthMismatch: images does not have n entries.
        ImageOutOfRange: some entry falls outside [0, ell).
    """
    if n < 0 or ell < 1:
        raise BadParams(f"need n >= 0 and ell >= 1, got n={n}, ell={ell}")
    table = tuple(int(value) for value in images)
    if len(table) != n:
        raise LengthMismatch(f"expected {n} images, got {len(table)}")
    for x, value in enumerate(table):
        if value < 0 or value >= ell:
            raise ImageOutOfRange(f"image {value} at position {x} not in [0, {ell})")
    ones = sum(table) if ell == 2 else None
    return Function(n=n, ell=ell, images=table, ones=ones)


def compose(outer: Function, inner: Function) -> Function:
    """outer after inner: x -> outer[inner[x]]."""
    if inner.ell != outer.n:
        raise CodomainMismatch(
            f"inner codomain {inner.ell} does not match outer universe {outer.n}"
        )
    table = outer.images
    return make_function(inner.n, outer.ell, (table[y] for y in inner.images))


def image_histogram(f: Function) -> List[int]:
    """Preimage sizes |f^-1(i)| for i in [ell]."""
    return np.bincount(np.asarray(f.images, dtype=np.int64), minlength=f.ell).tolist()


def nonuniformity(f: Function) -> int:
    """Largest gap between two nonempty preimage sizes (0 for even or constant f)."""
    sizes = [count for count in image_histogram(f) if count > 0]
    if not sizes:
        return 0
    return max(sizes) - min(sizes)


# Convenience constructors used by builders and tests.

def identity_function(n: int, ell: Optional[int] = None) -> Function:
    return make_function(n, n if ell is None else ell, range(n))


def modulo_function(n: int, m: int, ell: Optional[int] = None) -> Function:
    return make_function(n, m if ell is None else ell, (x % m for x in range(n)))


def binary_function(n: int, ones: Iterable[int]) -> Function:
    table = [0] * n
    for x in ones:
        table[x] = 1
    return make_function(n, 2, table)


def relabel_image(f: Function) -> Function:
    """Rename the values of f to 0..|Im f|-1, preserving their order."""
    rank = {value: index for index, value in enumerate(f.image())}
    return make_function(f.n, max(len(rank), 1), (rank[v] for v in f.images))


def with_codomain(f: Function, ell: int) -> Function:
    return make_function(f.n, ell, f.images)


def ceil_fraction(alpha: Fraction, n: int) -> int:
    """Exact ceil(alpha * n)."""
    return -((-alpha.numerator * n) // alpha.denominator)


def as_fraction(value) -> Fraction:
    """Parse 'p/q', ints or Fractions; floats are rejected to keep ceilings exact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise BadParams(f"not an exact rational: {value!r}") from exc
    raise BadParams(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class Family:
    """
    An ordered family of functions with its construction parameters.

    Attributes:
        kind: splitter, bisector, mapping or universal.
        n: Universe size shared by all members.
        k: Subset size the family is built for.
        ell: Common codomain size (2 for binary kinds).
        functions: Members in construction order.
        alpha: Ones fraction (binary kinds).
        beta: S1 hit fraction (mapping kind).
        k0, k1: Split sizes (mapping kind).
        uniformity: none, a-uniform(a), uniform or strong.
        regime: Flags naming each asymptotic precondition that did not hold.
        provenance: Free-form string metadata (builder, branch, seed, pool mode).
        coverage_log: Greedy progress records; not serialized and not compared.
    """

    kind: str
    n: int
    k: int
    ell: int
    functions: Tuple[Function, ...]
    alpha: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    k0: Optional[int] = None
    k1: Optional[int] = None
    uniformity: str = "none"
    regime: Tuple[str, ...] = ()
    provenance: Dict[str, str] = field(default_factory=dict)
    coverage_log: Tuple = field(default=(), compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    @property
    def out_of_regime(self) -> bool:
        return bool(self.regime)

    @property
    def target_ones(self) -> Optional[int]:
        if self.alpha is None:
            return None
        return ceil_fraction(self.alpha, self.n)


def make_family(
    kind: str,
    n: int,
    k: int,
    functions: Sequence[Function],
    *,
    ell: Optional[int] = None,
    alpha: Optional[Fraction] = None,
    beta: Optional[Fraction] = None,
    k0: Optional[int] = None,
    k1: Optional[int] = None,
    uniformity: str = "none",
    regime: Iterable[str] = (),
    provenance: Optional[Dict[str, str]] = None,
    coverage_log: Sequence = (),
) -> Family:
    """Validate the shared-parameter invariants and freeze a Family."""
    if kind not in KINDS:
        raise BadParams(f"unknown family kind {kind!r}")
    members = tuple(functions)
    if kind in BINARY_KINDS:
        ell = 2 if ell is None else ell
        if alpha is None:
            raise BadParams(f"{kind} family needs alpha")
    if ell is None:
        ell = members[0].ell if members else max(n, 1)
    for index, f in enumerate(members):
        if f.n != n or f.ell != ell:
            raise CodomainMismatch(
                f"function {index} is [{f.n}]->[{f.ell}], family is [{n}]->[{ell}]"
            )
    if kind in BINARY_KINDS:
        target = ceil_fraction(alpha, n)
        for index, f in enumerate(members):
            if f.ones != target:
                raise BadParams(
                    f"function {index} has {f.ones} ones, expected ceil(alpha*n)={target}"
                )
    seen_flags: List[str] = []
    for flag in regime:
        if flag not in seen_flags:
            seen_flags.append(flag)
    return Family(
        kind=kind,
        n=n,
        k=k,
        ell=ell,
        functions=members,
        alpha=alpha,
        beta=beta,
        k0=k0,
        k1=k1,
        uniformity=uniformity,
        regime=tuple(seen_flags),
        provenance={key: str(value) for key, value in (provenance or {}).items()},
        coverage_log=tuple(coverage_log),
    )
