"""Tests for functions and families"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from derandkit.errors import BadParams, CodomainMismatch, ImageOutOfRange, LengthMismatch
from derandkit.family import (
    as_fraction,
    binary_function,
    ceil_fraction,
    compose,
    identity_function,
    image_histogram,
    make_family,
    make_function,
    modulo_function,
    nonuniformity,
    relabel_image,
)


def tables(n, ell):
    return st.lists(st.integers(0, ell - 1), min_size=n, max_size=n)


def test_make_function_validates_table():
    """Wrong length and out-of-range images are rejected"""
    with pytest.raises(LengthMismatch):
        make_function(3, 2, [0, 1])
    with pytest.raises(ImageOutOfRange):
        make_function(3, 2, [0, 1, 2])
    f = make_function(4, 2, [1, 0, 1, 1])
    assert f.ones == 3
    assert f.ones_positions() == (0, 2, 3)
    assert f.zeros_positions() == (1,)


def test_compose_checks_codomain():
    """outer after inner needs inner's codomain to be outer's universe"""
    inner = modulo_function(6, 3)
    outer = make_function(3, 2, [1, 0, 1])
    assert compose(outer, inner).images == (1, 0, 1, 1, 0, 1)
    with pytest.raises(CodomainMismatch):
        compose(outer, identity_function(6))


@given(tables(5, 4), tables(4, 3), tables(3, 6))
def test_compose_is_associative(first, second, third):
    """(h . g) . f == h . (g . f)"""
    f = make_function(5, 4, first)
    g = make_function(4, 3, second)
    h = make_function(3, 6, third)
    assert compose(compose(h, g), f) == compose(h, compose(g, f))


@given(st.integers(1, 12).flatmap(lambda n: tables(n, 5)))
def test_histogram_sums_to_n(images):
    """Preimage sizes always add up to the universe size"""
    f = make_function(len(images), 5, images)
    histogram = image_histogram(f)
    assert len(histogram) == 5
    assert sum(histogram) == len(images)


def test_nonuniformity_and_relabel():
    """Gap between nonempty preimages, and image relabelling"""
    assert nonuniformity(modulo_function(10, 3)) == 1
    assert nonuniformity(make_function(6, 4, [0, 0, 0, 0, 1, 3])) == 3
    g = relabel_image(make_function(4, 10, [7, 2, 7, 9]))
    assert g.ell == 3
    assert g.images == (1, 0, 1, 2)


def test_exact_rationals():
    """Ceilings are exact and floats are refused"""
    assert as_fraction("1/2") == Fraction(1, 2)
    assert as_fraction(1) == Fraction(1)
    assert ceil_fraction(Fraction(1, 3), 7) == 3
    assert ceil_fraction(Fraction(1, 2), 8) == 4
    with pytest.raises(BadParams):
        as_fraction(0.5)
    with pytest.raises(BadParams):
        as_fraction("half")


def test_make_family_invariants():
    """Binary kinds need the exact ones-count; members share n and ell"""
    good = binary_function(4, [0, 1])
    family = make_family(
        "bisector", 4, 1, [good], alpha=Fraction(1, 2), regime=["k_below_16", "k_below_16"]
    )
    assert family.regime == ("k_below_16",)
    assert family.target_ones == 2
    assert family.out_of_regime
    with pytest.raises(BadParams):
        make_family("bisector", 4, 1, [binary_function(4, [0])], alpha=Fraction(1, 2))
    with pytest.raises(CodomainMismatch):
        make_family("splitter", 4, 1, [identity_function(4), identity_function(5)], ell=4)
    with pytest.raises(BadParams):
        make_family("hash", 4, 1, [good])
