"""
derandkit - deterministic constructions of splitters, bisectors, mapping
families and uniform universal sets, each checked by a brute-force oracle.
"""

__version__ = "1.0.0"

from derandkit.bisectors import alpha_bisector, base_bisector, interval_bisector
from derandkit.config import BuildConfig, load_config
from derandkit.core import construct_family, construct_family_file, describe_family, verify_family
from derandkit.family import Family, Function, make_family, make_function
from derandkit.family_file import read_family, write_family
from derandkit.mapping import (
    base_mapping_family,
    interval_mapping_family,
    iterated_mapping_family,
    universal_set,
)
from derandkit.splitters import build_splitter

__all__ = [
    "BuildConfig",
    "Family",
    "Function",
    "alpha_bisector",
    "base_bisector",
    "base_mapping_family",
    "build_splitter",
    "construct_family",
    "construct_family_file",
    "describe_family",
    "interval_bisector",
    "interval_mapping_family",
    "iterated_mapping_family",
    "load_config",
    "make_family",
    "make_function",
    "read_family",
    "universal_set",
    "verify_family",
    "write_family",
]
