"""
Prime sieve, prime windows and the CRT capacity check behind modulo splitters.

A window of distinct primes m_1..m_r is usable for k-subsets of [n] when
prod(m_i) >= n^(k(k-1)/2): a k-subset on which every x -> x mod m_i collides
would make every m_i divide the product of all pairwise differences, which is
smaller than n^(k(k-1)/2).
"""

import logging
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from derandkit.errors import BadParams, InsufficientPrimes, LimitTooSmall

logger = logging.getLogger(__name__)

# Double-precision results closer than this to an integer are recomputed.
BOUNDARY_EPS = 1e-6
HIGH_PRECISION = 60


def sieve(limit: int) -> List[int]:
    """
    All primes <= limit, ascending.

    Raises:
        LimitTooSmall: limit < 2.
    """
    if limit < 2:
        raise LimitTooSmall(f"sieve limit must be >= 2, got {limit}")
    return list(_sieve_cached(limit))


@lru_cache(maxsize=32)
def _sieve_cached(limit: int) -> Tuple[int, ...]:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(flags)[0])


def ceil_checked(value: float, exact) -> int:
    """ceil(value), recomputed with `exact()` (a Decimal) near integer boundaries."""
    if abs(value - round(value)) < BOUNDARY_EPS:
        with localcontext() as ctx:
            ctx.prec = HIGH_PRECISION
            precise = exact()
            floor = int(precise.to_integral_value(rounding="ROUND_FLOOR"))
            return floor if precise == floor else floor + 1
    return math.ceil(value)


def required_prime_count(n: int, k: int) -> int:
    """
    r = ceil(k(k-1) log2 n / (4 ln k + 2 ln log2 n - 2 ln 2)).

    Raises:
        BadParams: unless n >= k >= 2.
    """
    if not (n >= k >= 2):
        raise BadParams(f"required_prime_count needs n >= k >= 2, got n={n}, k={k}")
    log_n = math.log2(n)
    denominator = 4 * math.log(k) + 2 * math.log(log_n) - 2 * math.log(2)
    value = k * (k - 1) * log_n / denominator

    def exact() -> Decimal:
        two = Decimal(2)
        log2_n = Decimal(n).ln() / two.ln()
        den = 4 * Decimal(k).ln() + 2 * log2_n.ln() - 2 * two.ln()
        return Decimal(k * (k - 1)) * log2_n / den

    return ceil_checked(value, exact)


def crt_threshold(n: int, k: int) -> int:
    """n^(k(k-1)/2), exactly."""
    return n ** (k * (k - 1) // 2)


@dataclass(frozen=True)
class PrimeWindow:
    """
    Moduli for a modulo splitter.

    Attributes:
        moduli: Strictly increasing primes.
        n, k: Parameters the window was chosen for.
        capacity: Exact product of the moduli.
        required: Exact threshold n^(k(k-1)/2).
        in_regime: False when the asymptotic selection rule had to be widened.
    """

    moduli: Tuple[int, ...]
    n: int
    k: int
    capacity: int
    required: int
    in_regime: bool = True

    @property
    def r(self) -> int:
        return len(self.moduli)


def check_crt_capacity(window: PrimeWindow, n: int, k: int) -> bool:
    """True iff prod(moduli) >= n^(k(k-1)/2), in exact integer arithmetic."""
    return math.prod(window.moduli) >= crt_threshold(n, k)


def _make_window(moduli, n: int, k: int, in_regime: bool) -> PrimeWindow:
    ordered = tuple(sorted(moduli))
    return PrimeWindow(
        moduli=ordered,
        n=n,
        k=k,
        capacity=math.prod(ordered),
        required=crt_threshold(n, k),
        in_regime=in_regime,
    )


def prime_window(n: int, k: int, ell: int) -> PrimeWindow:
    """
    Choose primes m <= min(ell, n) whose product reaches n^(k(k-1)/2).

    Near ell ~ k^2 log2 n the r largest primes below k^2 log2 n are tried;
    for ell >= 2 k^2 log2 n the ceil(k^2 log2 n / log2 ell) largest primes
    below ell. If that selection misses capacity (or ell is below the regime)
    the window is widened: largest primes first until capacity is reached.

    Raises:
        BadParams: k < 2.
        InsufficientPrimes: even all primes <= min(ell, n) fall short.
    """
    if k < 2:
        raise BadParams(f"prime_window needs k >= 2, got k={k}")
    cutoff = min(ell, n)
    if cutoff < 2:
        raise InsufficientPrimes(f"no primes below min(ell, n) = {cutoff}")
    required = crt_threshold(n, k)
    primes = sieve(cutoff)
    descending = primes[::-1]

    if n >= k and n >= 2:
        scale = k * k * math.log2(n)
        candidate: List[int] = []
        if scale <= ell < 2 * scale:
            bound = min(int(scale), cutoff)
            below = [p for p in descending if p <= bound]
            candidate = below[: required_prime_count(n, k)] if n > 2 else below[:1]
        elif ell >= 2 * scale:
            count = math.ceil(scale / math.log2(ell))
            candidate = [p for p in descending if p < ell][:count]
        if candidate and math.prod(candidate) >= required:
            return _make_window(candidate, n, k, in_regime=True)

    chosen: List[int] = []
    product = 1
    for p in descending:
        if product >= required:
            break
        chosen.append(p)
        product *= p
    if product < required:
        raise InsufficientPrimes(
            f"primes <= {cutoff} multiply to {product} < {required} (n={n}, k={k})"
        )
    logger.warning("Widened prime window for n=%d k=%d ell=%d: %s", n, k, ell, chosen)
    return _make_window(chosen, n, k, in_regime=False)
