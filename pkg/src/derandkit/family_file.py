"""
Plain-text family files.

Layout:

    format=derandkit-family/1
    kind=bisector
    n=8
    k=2
    ell=2
    alpha=1/2
    uniformity=none
    count=6
    regime=k_below_16,n_below_k4
    provenance.builder=base_bisector
    ---
    0 0 0 0 1 1 1 1
    ...
    checksum=<CRC-32 of the body bytes, decimal>

Optional parameters (alpha, beta, k0, k1) are omitted when unset. The body is
one line per function with n space-separated image values, each line ending
in a newline; the checksum covers exactly those bytes.
"""

import logging
import zlib
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Union

from derandkit.errors import DerandomError, FamilyFileError
from derandkit.family import Family, make_family, make_function

logger = logging.getLogger(__name__)

FORMAT_VERSION = "derandkit-family/1"
SEPARATOR = "---"
PROVENANCE_PREFIX = "provenance."
_INT_FIELDS = ("n", "k", "ell", "count")
_OPTIONAL_INT_FIELDS = ("k0", "k1")


def _rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _body(family: Family) -> str:
    return "".join(" ".join(map(str, f.images)) + "\n" for f in family.functions)


def checksum(body: str) -> int:
    return zlib.crc32(body.encode("ascii"))


def serialize(family: Family) -> str:
    """Render a family in the on-disk format."""
    header: List[str] = [
        f"format={FORMAT_VERSION}",
        f"kind={family.kind}",
        f"n={family.n}",
        f"k={family.k}",
        f"ell={family.ell}",
    ]
    if family.alpha is not None:
        header.append(f"alpha={_rational(family.alpha)}")
    if family.beta is not None:
        header.append(f"beta={_rational(family.beta)}")
    for name in _OPTIONAL_INT_FIELDS:
        value = getattr(family, name)
        if value is not None:
            header.append(f"{name}={value}")
    header.append(f"uniformity={family.uniformity}")
    header.append(f"count={len(family)}")
    header.append(f"regime={','.join(family.regime)}")
    for key in sorted(family.provenance):
        value = family.provenance[key]
        if "\n" in key or "\n" in value or "=" in key:
            raise FamilyFileError(f"provenance entry {key!r} cannot be written on one line")
        header.append(f"{PROVENANCE_PREFIX}{key}={value}")
    body = _body(family)
    return "\n".join(header) + f"\n{SEPARATOR}\n" + body + f"checksum={checksum(body)}\n"


def _parse_int(fields: Dict[str, str], name: str) -> int:
    try:
        return int(fields[name])
    except KeyError:
        raise FamilyFileError(f"header is missing {name}=") from None
    except ValueError:
        raise FamilyFileError(f"header {name}={fields[name]!r} is not an integer") from None


def _parse_rational(fields: Dict[str, str], name: str) -> Optional[Fraction]:
    if name not in fields:
        return None
    numerator, slash, denominator = fields[name].partition("/")
    try:
        if not slash:
            raise ValueError
        return Fraction(int(numerator), int(denominator))
    except (ValueError, ZeroDivisionError):
        raise FamilyFileError(f"header {name}={fields[name]!r} is not p/q") from None


def parse(text: str) -> Family:
    """
    Parse a family file.

    Raises:
        FamilyFileError: malformed header, wrong count, checksum mismatch, or
            a body that does not form a valid family.
    """
    lines = text.split("\n")
    try:
        split = lines.index(SEPARATOR)
    except ValueError:
        raise FamilyFileError(f"no '{SEPARATOR}' line between header and body") from None

    fields: Dict[str, str] = {}
    provenance: Dict[str, str] = {}
    for number, line in enumerate(lines[:split], start=1):
        key, eq, value = line.partition("=")
        if not eq:
            raise FamilyFileError(f"header line {number} is not key=value: {line!r}")
        if key.startswith(PROVENANCE_PREFIX):
            provenance[key[len(PROVENANCE_PREFIX):]] = value
        else:
            fields[key] = value
    if fields.get("format") != FORMAT_VERSION:
        raise FamilyFileError(f"unsupported format {fields.get('format')!r}")

    count = _parse_int(fields, "count")
    rest = lines[split + 1 :]
    if len(rest) < count + 1 or not rest[count].startswith("checksum="):
        raise FamilyFileError(f"expected {count} body lines followed by checksum=")
    body_lines = rest[:count]
    if any(line for line in rest[count + 1 :]):
        raise FamilyFileError("unexpected content after the checksum line")
    body = "".join(line + "\n" for line in body_lines)
    try:
        stored = int(rest[count][len("checksum="):])
    except ValueError:
        raise FamilyFileError(f"bad checksum line {rest[count]!r}") from None
    if stored != checksum(body):
        raise FamilyFileError(f"checksum mismatch: file says {stored}, body gives {checksum(body)}")

    n, k, ell = (_parse_int(fields, name) for name in ("n", "k", "ell"))
    optional = {name: _parse_int(fields, name) if name in fields else None for name in _OPTIONAL_INT_FIELDS}
    regime = [flag for flag in fields.get("regime", "").split(",") if flag]
    try:
        functions = [
            make_function(n, ell, (int(token) for token in line.split()))
            for line in body_lines
        ]
        return make_family(
            fields.get("kind", ""), n, k, functions,
            ell=ell,
            alpha=_parse_rational(fields, "alpha"),
            beta=_parse_rational(fields, "beta"),
            uniformity=fields.get("uniformity", "none"),
            regime=regime,
            provenance=provenance,
            **optional,
        )
    except ValueError as exc:
        if isinstance(exc, FamilyFileError):
            raise
        raise FamilyFileError(f"invalid family body: {exc}") from exc
    except DerandomError as exc:
        raise FamilyFileError(f"invalid family body: {exc}") from exc


def write_family(family: Family, path: Union[str, Path]) -> Path:
    """Write `family` to `path`, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize(family), encoding="ascii")
    logger.info("Wrote %s family with %d functions to %s", family.kind, len(family), path)
    return path


def read_family(path: Union[str, Path]) -> Family:
    """
    Raises:
        FamilyFileError: unreadable or malformed file.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise FamilyFileError(f"cannot read {path}: {exc}") from exc
    return parse(text)
