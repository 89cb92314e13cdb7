"""Tests for splitter constructions"""

import math
from math import comb

import pytest

from derandkit.config import BuildConfig
from derandkit.errors import BadParams, InsufficientPrimes, NonuniformityExceeded, PreconditionFailed
from derandkit.family import make_family, make_function, modulo_function, nonuniformity
from derandkit.oracle import verify_splitter, verify_uniformity
from derandkit.splitters import (
    brute_force_splitter,
    build_smoothing_table,
    build_splitter,
    composed_splitter,
    injective_progress_bound,
    modulo_splitter,
    smooth,
)


def test_modulo_splitter_example():
    """(16, 2, 8) uses the primes 5 and 7"""
    family = modulo_splitter(16, 2, 8)
    assert family.provenance["moduli"] == "5,7"
    assert len(family) == 2
    assert "k_below_8" in family.regime
    assert verify_splitter(family, 2).valid
    assert verify_uniformity(family, "uniform").valid


def test_modulo_splitter_grid():
    """Every returned modulo splitter is valid and each function is near-balanced"""
    built = 0
    for n in range(6, 25):
        for k in (1, 2, 3):
            for ell in range(k, min(n, 12) + 1):
                try:
                    family = modulo_splitter(n, k, ell)
                except InsufficientPrimes:
                    continue
                built += 1
                report = verify_splitter(family, k)
                assert report.valid, (n, k, ell)
                assert report.checked == comb(n, k)
                assert all(nonuniformity(f) <= 1 for f in family)
    assert built > 100


def test_composed_splitter():
    """Two-level composition through an explicit intermediate codomain"""
    family = composed_splitter(24, 2, 8, intermediate=12)
    assert verify_splitter(family, 2).valid
    assert family.provenance["intermediate"] == "12"
    with pytest.raises(BadParams):
        composed_splitter(24, 3, 8)
    relaxed = composed_splitter(24, 3, 23, BuildConfig(allow_out_of_regime=True))
    assert "ell_below_k3" in relaxed.regime
    assert verify_splitter(relaxed, 3).valid


def test_brute_force_splitter_is_strong(small_config):
    """Greedy over balanced functions gives a strongly uniform splitter"""
    family = brute_force_splitter(6, 2, 3, config=small_config)
    assert family.uniformity == "strong"
    assert verify_splitter(family, 2).valid
    assert verify_uniformity(family, "strong").valid
    assert family.coverage_log[0].remaining == comb(6, 2)


def test_build_splitter_branches(small_config):
    """identity, composed and brute_force branches"""
    identity = build_splitter(10, 2, 12, config=small_config)
    assert identity.provenance["branch"] == "identity"
    assert len(identity) == 1

    composed = build_splitter(16, 2, 8, goal="uniform", config=small_config)
    assert composed.provenance["branch"] == "composed"
    assert verify_splitter(composed, 2).valid
    assert verify_uniformity(composed, "uniform").valid

    strong = build_splitter(6, 2, 3, goal="strong", config=small_config)
    assert strong.provenance["branch"] == "brute_force"
    assert verify_uniformity(strong, "strong").valid

    with pytest.raises(BadParams):
        build_splitter(10, 3, 2, config=small_config)
    with pytest.raises(BadParams):
        build_splitter(10, 2, 4, goal="perfect", config=small_config)



GRID = [(n, k, ell) for n in range(6, 25) for k in (1, 2, 3) for ell in range(k, min(n, 12) + 1)]
GRID_CONFIG = BuildConfig(exhaustive_limit=2_000, sample_size=2_000, seed=0)


def test_build_splitter_grid():
    """goal=uniform gives a valid uniform splitter across the small grid"""
    for n, k, ell in GRID:
        family = build_splitter(n, k, ell, goal="uniform", config=GRID_CONFIG)
        assert verify_splitter(family, k).valid, (n, k, ell)
        assert verify_uniformity(family, "uniform").valid, (n, k, ell)


def test_brute_force_splitter_grid():
    """Balanced greedy covers give strongly uniform splitters across the grid"""
    for n, k, ell in GRID:
        family = brute_force_splitter(n, k, ell, config=GRID_CONFIG)
        assert verify_splitter(family, k).valid, (n, k, ell)
        assert verify_uniformity(family, "strong").valid, (n, k, ell)


def test_composed_splitter_grid():
    """In-regime composed splitters (ell >= k^3) across the grid"""
    built = 0
    for n, k, ell in GRID:
        if k == 3 or ell < k ** 3:
            continue
        family = composed_splitter(n, k, ell, GRID_CONFIG)
        built += 1
        assert verify_splitter(family, k).valid, (n, k, ell)
    assert built > 100


@pytest.mark.parametrize("t,k,ell", [(6, 2, 6), (7, 2, 7), (8, 2, 4), (6, 3, 6), (8, 1, 4)])
def test_brute_force_progress(small_config, t, k, ell):
    """Each greedy round over a full pool covers at least the expected fraction"""
    family = brute_force_splitter(t, k, ell, config=small_config)
    assert family.provenance["pool"] == "full"
    bound = injective_progress_bound(ell, k)
    assert all(step.fraction >= bound - 1e-12 for step in family.coverage_log)
    if bound >= 0.25:
        assert len(family) <= math.ceil(math.log(comb(t, k), 4 / 3)) + 1


def _digit_family():
    """Three base-4 digit functions on [32] plus one 2-uniform extra function"""
    n = 32
    functions = [
        modulo_function(n, 4),
        make_function(n, 4, [(x // 4) % 4 for x in range(n)]),
        make_function(n, 4, [x // 16 for x in range(n)]),
        make_function(n, 4, [0] * 7 + [1] * 9 + [2] * 8 + [3] * 8),
    ]
    return make_family("splitter", n, 2, functions, ell=4)


def test_smoothing_table():
    """Columns sorted by value, k stripes below h and one above"""
    f = make_function(32, 4, [0] * 7 + [1] * 9 + [2] * 8 + [3] * 8)
    table = build_smoothing_table(f, 2)
    assert table.values == (0, 1, 2, 3)
    assert table.h == 7
    assert table.stripes == ((0, 4), (4, 7), (7, 9))


def test_smooth_contract():
    """(k+1)|F| functions, uniform, still a splitter"""
    family = _digit_family()
    assert verify_splitter(family, 2).valid
    smoothed = smooth(family, 2)
    assert len(smoothed) == 3 * len(family)
    assert verify_uniformity(smoothed, "uniform").valid
    assert verify_splitter(smoothed, 2).valid


def test_smooth_preconditions():
    """n >= a*ell*(k+1) and a-uniform input are required"""
    big = make_family("splitter", 713, 5, [modulo_function(713, 29, 30)], ell=30)
    with pytest.raises(PreconditionFailed):
        smooth(big, 5)
    with pytest.raises(NonuniformityExceeded):
        smooth(_digit_family(), 1)
