"""Tests for the brute-force oracles"""

from fractions import Fraction
from math import comb

from derandkit.family import binary_function, identity_function, make_family, make_function
from derandkit.oracle import (
    colex_subsets,
    expected_checks,
    verify_bisector,
    verify_mapping_family,
    verify_splitter,
    verify_uniformity,
    verify_universal,
)

HALF = Fraction(1, 2)


def test_colex_order():
    """Subsets are ordered by their largest element first"""
    assert list(colex_subsets(4, 2)) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]
    assert list(colex_subsets(3, 0)) == [()]


def test_verify_splitter():
    """Identity is a splitter; a 2-valued table is not for k = 2 with collisions"""
    ok = make_family("splitter", 5, 2, [identity_function(5)], ell=5)
    report = verify_splitter(ok, 2)
    assert report.valid and report.checked == comb(5, 2)
    assert report.result_line() == "RESULT valid=true checked=10 witness=none"

    bad = make_family("splitter", 4, 2, [make_function(4, 2, [0, 0, 1, 1])], ell=2)
    report = verify_splitter(bad, 2)
    assert not report.valid
    assert report.witness == (0, 1)
    assert report.result_line() == "RESULT valid=false checked=6 witness=0,1"


def test_verify_uniformity_modes():
    """uniform ignores unused values; strong does not; a-uniform allows a gap"""
    f = make_function(6, 4, [0, 0, 1, 1, 2, 2])
    family = make_family("splitter", 6, 1, [f], ell=4)
    assert verify_uniformity(family, "uniform").valid
    assert not verify_uniformity(family, "strong").valid
    skewed = make_family("splitter", 6, 1, [make_function(6, 2, [0, 0, 0, 0, 1, 1])], ell=2)
    assert not verify_uniformity(skewed, "uniform").valid
    assert verify_uniformity(skewed, "a_uniform", a=2).valid
    assert not verify_uniformity(skewed, "a_uniform", a=1).valid


def test_bisector_that_is_not_universal():
    """A valid bisector can still miss a 1-pattern"""
    family = make_family(
        "bisector", 4, 1,
        [binary_function(4, [3]), binary_function(4, [0])],
        alpha=Fraction(1, 4),
    )
    assert verify_bisector(family, 1, Fraction(1, 4)).valid
    report = verify_universal(family, 1, Fraction(1, 4))
    assert not report.valid
    assert report.witness == ((), (1,))
    assert report.witness_text() == "|1"


def test_ones_count_is_checked_first():
    """A member with the wrong ones-count is reported by index"""
    family = make_family("splitter", 4, 1, [make_function(4, 2, [1, 0, 0, 0])], ell=2)
    report = verify_bisector(family, 1, HALF)
    assert not report.valid
    assert report.witness_text() == "function:0"


def test_mapping_and_universal_counts():
    """checked equals the number of targets"""
    functions = [
        binary_function(4, ones)
        for ones in ([0, 1], [2, 3], [0, 2], [1, 3], [0, 3], [1, 2])
    ]
    family = make_family("universal", 4, 2, functions, alpha=HALF)
    report = verify_universal(family, 2, HALF)
    assert report.valid
    assert report.checked == expected_checks("universal", 4, 2)
    mapping = verify_mapping_family(family, 1, 1, HALF, 1)
    assert mapping.valid
    assert mapping.checked == expected_checks("mapping", 4, 2, 1, 1) == 12


def test_sampled_report():
    """sample= checks only that many targets and marks the report"""
    family = make_family("splitter", 10, 2, [identity_function(10)], ell=10)
    report = verify_splitter(family, 2, sample=7, seed=1)
    assert report.sampled and report.checked == 7 and report.valid


def test_wrong_ones_count_reports_the_function():
    """Mapping and universal oracles name the offending member when the ones-count is off"""
    functions = [binary_function(4, [0, 1]), binary_function(4, [2, 3])]
    universal = make_family("universal", 4, 1, functions, alpha=HALF)
    report = verify_universal(universal, 1, Fraction(1, 4))
    assert not report.valid
    assert report.witness_kind == "function"
    assert report.result_line() == "RESULT valid=false checked=0 witness=function:0"

    mapping = make_family("mapping", 4, 2, functions, alpha=HALF, beta=Fraction(1), k0=1, k1=1)
    report = verify_mapping_family(mapping, 1, 1, Fraction(1, 4), 1)
    assert report.witness_kind == "function"
    assert report.result_line().endswith("witness=function:0")
