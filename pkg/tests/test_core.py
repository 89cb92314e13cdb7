"""Tests for core API functionality"""

from fractions import Fraction
from pathlib import Path
from tempfile import TemporaryDirectory

import pytest

from derandkit.core import (
    METHODS,
    construct_family,
    construct_family_file,
    describe_family,
    verify_family,
)
from derandkit.errors import BadParams
from derandkit.family import binary_function, make_family
from derandkit.family_file import read_family


def test_construct_family_file_writes_verified_bisector(small_config):
    """Build, certify and write a bisector in one call"""
    with TemporaryDirectory() as tmpdir:
        result = construct_family_file(
            "bisector", 8, 2, Path(tmpdir) / "out" / "b.txt",
            config=small_config,
            alpha="1/2",
        )

        assert result["valid"] == "true"
        assert result["result"].startswith("RESULT valid=true checked=28")
        assert Path(result["family_file"]).exists()

        family = read_family(result["family_file"])
        assert family.kind == "bisector"
        assert family.alpha == Fraction(1, 2)
        assert family.provenance["verified"] == "true"
        assert str(len(family)) == result["count"]


def test_construct_family_file_without_verify(small_config):
    """--no-verify still writes the file and records the skip"""
    with TemporaryDirectory() as tmpdir:
        result = construct_family_file(
            "splitter", 16, 2, Path(tmpdir) / "s.txt",
            verify=False,
            config=small_config,
            ell=8,
        )
        assert result["valid"] == "skipped"
        assert result["result"] == ""
        assert read_family(result["family_file"]).provenance["verified"] == "skipped"


def test_construct_splitter_defaults_to_build(small_config):
    """Splitters default to the build dispatcher"""
    family = construct_family("splitter", 16, 2, ell=8, config=small_config)
    assert family.kind == "splitter"
    assert family.uniformity in ("uniform", "strong")
    assert len(family) >= 2
    assert verify_family(family).valid


@pytest.mark.parametrize("method", METHODS["bisector"])
def test_every_bisector_method(small_config, method):
    """Each bisector method passes the oracle"""
    family = construct_family("bisector", 8, 1, alpha="1/2", method=method, config=small_config)
    assert verify_family(family).valid


def test_mapping_defaults_k0(small_config):
    """k0 falls back to k - k1"""
    family = construct_family("mapping", 8, 2, alpha="1/2", k1=1, config=small_config)
    assert (family.k0, family.k1, family.beta) == (1, 1, Fraction(1))
    assert verify_family(family).valid


def test_mapping_base_with_partial_beta(small_config):
    """beta below 1 goes through the base method"""
    family = construct_family(
        "mapping", 8, 3, alpha="1/2", k1=2, beta="1/2", method="base", config=small_config
    )
    assert family.beta == Fraction(1, 2)
    assert verify_family(family).valid


def test_universal_through_dispatcher(small_config):
    """Universal sets check every split of every pair"""
    family = construct_family("universal", 8, 2, alpha="1/2", config=small_config)
    report = verify_family(family)
    assert report.valid
    assert report.checked == 28 * 4


@pytest.mark.parametrize(
    "kind,params",
    [
        ("sunflower", {"alpha": "1/2"}),
        ("splitter", {}),
        ("splitter", {"ell": 4, "method": "alpha"}),
        ("bisector", {}),
        ("bisector", {"alpha": "0.5.1"}),
        ("mapping", {"alpha": "1/2"}),
        ("mapping", {"alpha": "1/2", "k1": 1, "beta": "1/2"}),
    ],
)
def test_bad_requests(small_config, kind, params):
    """Missing or contradictory parameters raise BadParams before building"""
    with pytest.raises(BadParams):
        construct_family(kind, 8, 2, config=small_config, **params)


def test_verify_family_reports_witness():
    """A hand-written family where element 0 is never zero"""
    family = make_family(
        "bisector", 4, 1, [binary_function(4, [0, 1])], alpha=Fraction(1, 2)
    )
    report = verify_family(family)
    assert not report.valid
    assert report.witness == (0,)
    assert report.result_line().endswith("witness=0")


def test_describe_family(small_config):
    """info lines for a bisector"""
    family = construct_family("bisector", 8, 2, alpha="1/2", method="base", config=small_config)
    lines = describe_family(family)

    assert "kind: bisector" in lines
    assert f"count: {len(family)}" in lines
    assert "ones per function: target 4, all equal" in lines
    assert any(line.startswith("provenance.builder: ") for line in lines)


def test_describe_splitter_shows_preimages(small_config):
    """info lines for a splitter show preimage sizes"""
    family = construct_family("splitter", 8, 2, ell=4, method="brute_force", config=small_config)
    lines = describe_family(family)
    assert "ell: 4" in lines
    assert any(line.startswith("preimage sizes: ") for line in lines)
