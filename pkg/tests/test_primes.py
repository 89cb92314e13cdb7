"""Tests for prime windows"""

from decimal import Decimal

import pytest

from derandkit.errors import InsufficientPrimes, LimitTooSmall
from derandkit.primes import (
    ceil_checked,
    check_crt_capacity,
    crt_threshold,
    prime_window,
    required_prime_count,
    sieve,
)


def test_sieve():
    """Primes up to the limit, inclusive"""
    assert sieve(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert sieve(2) == [2]
    with pytest.raises(LimitTooSmall):
        sieve(1)


def test_required_prime_count_matches_high_precision_value():
    """r(256, 8) = 41"""
    assert required_prime_count(256, 8) == 41


def test_ceil_checked_uses_exact_value_near_integers():
    """A value a hair above an integer is recomputed exactly"""
    assert ceil_checked(3.0000000001, lambda: Decimal(3)) == 3
    assert ceil_checked(2.5, lambda: Decimal("2.5")) == 3


@pytest.mark.parametrize(
    "n, k, ell, moduli",
    [(16, 2, 8, (5, 7)), (8, 2, 11, (5, 7)), (5, 2, 5, (5,))],
)
def test_prime_window_examples(n, k, ell, moduli):
    """Widened windows take the largest primes <= min(ell, n)"""
    window = prime_window(n, k, ell)
    assert window.moduli == moduli
    assert window.capacity >= window.required == crt_threshold(n, k)


def test_crt_capacity_over_grid():
    """Every returned window reaches n^(k(k-1)/2) exactly"""
    returned = 0
    for n in range(6, 25):
        for k in (2, 3):
            for ell in range(k, min(n, 12) + 1):
                try:
                    window = prime_window(n, k, ell)
                except InsufficientPrimes:
                    continue
                returned += 1
                assert check_crt_capacity(window, n, k)
                assert all(m <= min(ell, n) for m in window.moduli)
    assert returned > 0


def test_insufficient_primes():
    """Too few primes below ell"""
    with pytest.raises(InsufficientPrimes):
        prime_window(24, 3, 3)
