"""
Core API for derandkit: build a family by kind and method, verify it, describe
it, and write it to disk.
"""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from derandkit.bisectors import alpha_bisector, base_bisector, interval_bisector
from derandkit.config import DEFAULT_CONFIG, BuildConfig
from derandkit.errors import BadParams
from derandkit.family import Family, as_fraction, image_histogram
from derandkit.family_file import write_family
from derandkit.mapping import (
    base_mapping_family,
    interval_mapping_family,
    iterated_mapping_family,
    universal_set,
)
from derandkit.oracle import (
    VerifyReport,
    verify_bisector,
    verify_mapping_family,
    verify_splitter,
    verify_uniformity,
    verify_universal,
)
from derandkit.splitters import (
    brute_force_splitter,
    build_splitter,
    composed_splitter,
    modulo_splitter,
)

logger = logging.getLogger(__name__)

METHODS = {
    "splitter": ("build", "modulo", "composed", "brute_force"),
    "bisector": ("alpha", "base", "interval"),
    "mapping": ("iterated", "base", "interval"),
    "universal": ("iterated", "interval"),
}


def _require(value, flag: str, kind: str):
    if value is None:
        raise BadParams(f"{kind} construction needs {flag}")
    return value


def construct_family(
    kind: str,
    n: int,
    k: int,
    *,
    ell: Optional[int] = None,
    alpha=None,
    k0: Optional[int] = None,
    k1: Optional[int] = None,
    beta=None,
    method: Optional[str] = None,
    goal: str = "uniform",
    config: Optional[BuildConfig] = None,
) -> Family:
    """
    Build a family without the post-build oracle pass.

    Args:
        kind: splitter, bisector, mapping or universal.
        n, k: Universe size and subset size. For mapping families k is ignored
            when k0 and k1 are given (k0 = k - k1 otherwise).
        ell: Codomain size (splitters).
        alpha: Ones fraction as "p/q", int or Fraction (binary kinds).
        k0, k1, beta: Mapping-family split and hit fraction (beta defaults to 1).
        method: One of METHODS[kind]; the first entry is the default.
        goal: Uniformity goal for method "build".
        config: Build knobs; BuildConfig() when omitted.

    Returns:
        The family, not yet certified by the oracle.
    """
    config = config or DEFAULT_CONFIG
    if kind not in METHODS:
        raise BadParams(f"unknown kind {kind!r}; choose from {', '.join(METHODS)}")
    method = method or METHODS[kind][0]
    if method not in METHODS[kind]:
        raise BadParams(f"{kind} supports methods {', '.join(METHODS[kind])}, not {method!r}")
    logger.info("Constructing %s (method %s) for n=%d k=%d", kind, method, n, k)

    if kind == "splitter":
        ell = _require(ell, "--l", kind)
        if method == "build":
            return build_splitter(n, k, ell, goal, config, certify=False)
        if method == "modulo":
            return modulo_splitter(n, k, ell, config, certify=False)
        if method == "composed":
            return composed_splitter(n, k, ell, config, certify=False)
        return brute_force_splitter(n, k, ell, config=config, certify=False)

    alpha = as_fraction(_require(alpha, "--alpha", kind))
    if kind == "bisector":
        builder = {"alpha": alpha_bisector, "base": base_bisector, "interval": interval_bisector}[method]
        return builder(n, k, alpha, config, certify=False)

    if kind == "universal":
        return universal_set(n, k, alpha, config, method, certify=False)

    if k1 is None:
        raise BadParams("mapping construction needs --k1")
    k0 = k - k1 if k0 is None else k0
    if method == "base":
        beta = as_fraction(beta if beta is not None else 1)
        return base_mapping_family(n, k0, k1, alpha, beta, config, certify=False)
    if beta is not None and as_fraction(beta) != 1:
        raise BadParams(f"method {method} builds beta = 1 families; use --method base for beta={beta}")
    builder = iterated_mapping_family if method == "iterated" else interval_mapping_family
    return builder(n, k0, k1, alpha, config, certify=False)


def verify_family(family: Family, sample: Optional[int] = None, seed: int = 0) -> VerifyReport:
    """Run the oracle matching the family's kind, using its declared parameters."""
    if family.kind == "splitter":
        if family.uniformity in ("uniform", "strong"):
            shape = verify_uniformity(family, family.uniformity)
            if not shape.valid:
                return shape
        return verify_splitter(family, family.k, sample, seed)
    if family.kind == "bisector":
        return verify_bisector(family, family.k, family.alpha, sample, seed)
    if family.kind == "mapping":
        return verify_mapping_family(
            family, family.k0, family.k1, family.alpha, family.beta, sample, seed
        )
    return verify_universal(family, family.k, family.alpha, sample, seed)


def describe_family(family: Family) -> List[str]:
    """Human-readable summary lines for `derandkit info`."""
    lines = [f"kind: {family.kind}", f"n: {family.n}", f"k: {family.k}"]
    if family.kind == "splitter":
        lines.append(f"ell: {family.ell}")
        lines.append(f"uniformity: {family.uniformity}")
    if family.alpha is not None:
        lines.append(f"alpha: {family.alpha}")
    if family.kind == "mapping":
        lines.append(f"k0: {family.k0}  k1: {family.k1}  beta: {family.beta}")
    lines.append(f"count: {len(family)}")

    if family.target_ones is not None:
        counts = sorted({f.ones for f in family.functions})
        status = "all equal" if counts in ([], [family.target_ones]) else f"found {counts}"
        lines.append(f"ones per function: target {family.target_ones}, {status}")
    elif family.functions:
        sizes = [
            [c for c in image_histogram(f) if c > 0] for f in family.functions
        ]
        smallest = min(min(s) for s in sizes)
        largest = max(max(s) for s in sizes)
        images = sorted({len(s) for s in sizes})
        lines.append(f"preimage sizes: {smallest}..{largest}, image sizes {images}")

    lines.append(f"regime: {', '.join(family.regime) or 'in regime'}")
    for key in sorted(family.provenance):
        lines.append(f"provenance.{key}: {family.provenance[key]}")
    return lines


def construct_family_file(
    kind: str,
    n: int,
    k: int,
    output: Union[str, Path],
    *,
    verify: bool = True,
    config: Optional[BuildConfig] = None,
    **params,
) -> Dict[str, str]:
    """
    Build a family, certify it, and write it to `output`.

    Args:
        kind, n, k, config, **params: Passed to construct_family.
        output: FamilyFile path; parent directories are created.
        verify: Run the exhaustive oracle after building (default on).

    Returns:
        {"family_file": path, "count": str, "valid": "true"|"false"|"skipped",
         "result": RESULT line or ""}. The file is written even when the
        oracle rejects the family, with provenance.verified=false.
    """
    # 1) Build
    family = construct_family(kind, n, k, config=config, **params)

    # 2) Certify
    report: Optional[VerifyReport] = None
    if verify:
        report = verify_family(family)
        if not report.valid:
            logger.warning("Oracle rejected the %s: %s", kind, report.result_line())
    verdict = "skipped" if report is None else ("true" if report.valid else "false")
    family = replace(family, provenance={**family.provenance, "verified": verdict})

    # 3) Write
    path = write_family(family, output)
    return {
        "family_file": str(path),
        "count": str(len(family)),
        "valid": verdict,
        "result": report.result_line() if report else "",
    }
