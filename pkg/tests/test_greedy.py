"""Tests for the greedy cover engine"""

import numpy as np
import pytest

from derandkit.config import BuildConfig
from derandkit.errors import PoolExhausted
from derandkit.greedy import (
    balanced_pool,
    balanced_pool_size,
    binary_pool,
    greedy_cover,
    pair_targets,
    subset_targets,
    zero_on,
)


def test_targets():
    """All k-subsets and all disjoint (S0, S1) pairs"""
    assert subset_targets(4, 2).shape == (6, 2)
    zeros, ones = pair_targets(4, 1, 1)
    assert zeros.shape == (12, 1) and ones.shape == (12, 1)
    assert not (zeros[:, 0] == ones[:, 0]).any()
    zeros, ones = pair_targets(4, 0, 2)
    assert zeros.shape == (6, 0)


def test_full_binary_pool(small_config):
    """Every table with the right ones-count, sorted and unique"""
    pool, descriptor = binary_pool(5, 2, small_config)
    assert pool.shape == (10, 5)
    assert (pool.sum(axis=1) == 2).all()
    assert descriptor.mode == "full"
    assert len(np.unique(pool, axis=0)) == 10


def test_sampled_binary_pool_is_seeded():
    """Over-budget pools are a reproducible sample"""
    config = BuildConfig(exhaustive_limit=5, sample_size=50, seed=3)
    first, descriptor = binary_pool(8, 4, config)
    second, _ = binary_pool(8, 4, config)
    assert descriptor.mode == "sampled"
    assert descriptor.full_size == 70
    assert (first.sum(axis=1) == 4).all()
    assert np.array_equal(first, second)


@pytest.mark.parametrize("t, ell, size", [(4, 2, 6), (5, 2, 20), (3, 3, 6)])
def test_balanced_pool(small_config, t, ell, size):
    """Strongly balanced tables, counted and enumerated"""
    assert balanced_pool_size(t, ell) == size
    pool, _ = balanced_pool(t, ell, small_config)
    assert pool.shape == (size, t)
    for row in pool:
        counts = np.bincount(row, minlength=ell)
        assert counts.max() - counts.min() <= 1


def test_greedy_cover_finishes_and_logs(small_config):
    """Every 2-subset of [6] ends up all-zero under a chosen row"""
    pool, descriptor = binary_pool(6, 3, small_config)
    targets = subset_targets(6, 2)
    state = greedy_cover(pool, descriptor, targets.shape[0], 2, zero_on(targets), small_config)
    assert state.remaining == 0
    assert len(state.chosen) == len(state.coverage_log)
    assert state.coverage_log[0].remaining == 15
    chosen = np.array(state.chosen)
    for subset in targets:
        assert (chosen[:, subset] == 0).all(axis=1).any()


def test_greedy_cover_is_deterministic_across_workers():
    """Threaded scoring picks the same rows"""
    serial = BuildConfig(chunk_elements=64)
    threaded = BuildConfig(chunk_elements=64, workers=3)
    pool, descriptor = binary_pool(8, 4, serial)
    targets = subset_targets(8, 2)
    a = greedy_cover(pool, descriptor, targets.shape[0], 2, zero_on(targets), serial)
    b = greedy_cover(pool, descriptor, targets.shape[0], 2, zero_on(targets), threaded)
    assert all(np.array_equal(x, y) for x, y in zip(a.chosen, b.chosen))
    assert len(a.chosen) == len(b.chosen)


def test_pool_exhausted(small_config):
    """No row covers the remaining targets"""
    pool = np.ones((1, 3), dtype=np.int8)
    targets = subset_targets(3, 1)
    descriptor = binary_pool(3, 3, small_config)[1]
    with pytest.raises(PoolExhausted):
        greedy_cover(pool, descriptor, targets.shape[0], 1, zero_on(targets), small_config)
