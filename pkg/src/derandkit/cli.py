#!/usr/bin/env python3
"""
CLI tool for derandkit
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from derandkit.config import load_config
from derandkit.core import METHODS, construct_family_file, describe_family, verify_family
from derandkit.errors import BadParams, BuildFailure, DerandomError, FamilyFileError, WindowFailure
from derandkit.family import as_fraction
from derandkit.family_file import read_family
from derandkit.splitters import GOALS

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_BUILD = 3
EXIT_REJECTED = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="derandkit",
        description="derandkit - construct and verify splitters, bisectors and universal sets",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  derandkit construct --kind splitter --n 16 --k 2 --l 8 --goal uniform --out f.txt
  derandkit construct --kind bisector --n 8 --k 2 --alpha 1/2 --out b.txt
  derandkit construct --kind universal --n 8 --k 2 --alpha 1/2 --out u.txt
  derandkit verify b.txt
  derandkit info f.txt
        """,
    )
    parser.add_argument(
        "--verbose", "-v", action="count", default=0, help="Log INFO (-v) or DEBUG (-vv) to stderr"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    construct = commands.add_parser("construct", help="Build a family and write it to a file")
    construct.add_argument("--kind", required=True, choices=sorted(METHODS), help="Family kind")
    construct.add_argument("--n", type=int, required=True, help="Universe size")
    construct.add_argument("--k", type=int, required=True, help="Subset size")
    construct.add_argument("--l", dest="ell", type=int, help="Codomain size (splitters)")
    construct.add_argument("--alpha", help="Ones fraction p/q (binary kinds)")
    construct.add_argument("--k0", type=int, help="Zeros side of a mapping family (default k - k1)")
    construct.add_argument("--k1", type=int, help="Ones side of a mapping family")
    construct.add_argument("--beta", help="S1 hit fraction p/q (mapping, method base)")
    construct.add_argument("--goal", default="uniform", choices=GOALS, help="Splitter uniformity goal (default: uniform)")
    construct.add_argument("--method", help="Construction method; see `info` provenance for what ran")
    construct.add_argument("--out", "-o", required=True, help="Output FamilyFile path")
    construct.add_argument("--no-verify", action="store_true", help="Skip the post-build oracle pass")

    budget = construct.add_argument_group("desk-mode options")
    budget.add_argument("--pool-budget", type=int, help="Enumerate candidate pools up to this size")
    budget.add_argument("--seed", type=int, help="Seed for sampled pools")
    budget.add_argument("--granularity", type=int, help="Interval grid step")
    budget.add_argument(
        "--allow-out-of-regime", action="store_true", help="Let composed splitters run below ell >= k^3"
    )

    verify = commands.add_parser("verify", help="Check a FamilyFile with the brute-force oracle")
    verify.add_argument("path", help="FamilyFile to verify")
    verify.add_argument("--k", type=int, help="Override the header's k")
    verify.add_argument("--alpha", help="Override the header's alpha")
    verify.add_argument("--k0", type=int, help="Override the header's k0")
    verify.add_argument("--k1", type=int, help="Override the header's k1")
    verify.add_argument("--beta", help="Override the header's beta")
    verify.add_argument("--sample", type=int, help="Check only this many random targets")
    verify.add_argument("--seed", type=int, default=0, help="Seed for --sample (default: 0)")

    info = commands.add_parser("info", help="Summarize a FamilyFile")
    info.add_argument("path", help="FamilyFile to describe")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _cmd_construct(args: argparse.Namespace) -> int:
    config = load_config(
        exhaustive_limit=args.pool_budget,
        seed=args.seed,
        granularity=args.granularity,
        allow_out_of_regime=args.allow_out_of_regime or None,
    )
    result = construct_family_file(
        args.kind,
        args.n,
        args.k,
        args.out,
        verify=not args.no_verify,
        config=config,
        ell=args.ell,
        alpha=args.alpha,
        k0=args.k0,
        k1=args.k1,
        beta=args.beta,
        method=args.method,
        goal=args.goal,
    )
    if result["result"]:
        print(result["result"])
    if result["valid"] == "false":
        print(f"❌ Oracle rejected the family; written to {result['family_file']} with verified=false", file=sys.stderr)
        return EXIT_REJECTED
    print(f"✅ Successfully constructed {args.kind} with {result['count']} functions")
    print(f"  • family_file: {result['family_file']}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    family = read_family(args.path)
    overrides = {
        "k": args.k,
        "alpha": as_fraction(args.alpha) if args.alpha is not None else None,
        "k0": args.k0,
        "k1": args.k1,
        "beta": as_fraction(args.beta) if args.beta is not None else None,
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if overrides:
        family = replace(family, **overrides)
    report = verify_family(family, sample=args.sample, seed=args.seed)
    print(report.result_line())
    if report.stats:
        print("STATS " + " ".join(f"{hits}:{count}" for hits, count in report.stats.items()))
    return EXIT_OK if report.valid else EXIT_INVALID


def _cmd_info(args: argparse.Namespace) -> int:
    family = read_family(args.path)
    for line in describe_family(family):
        print(line)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    _configure_logging(args.verbose)

    handlers = {"construct": _cmd_construct, "verify": _cmd_verify, "info": _cmd_info}
    try:
        return handlers[args.command](args)
    except (BadParams, FamilyFileError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (BuildFailure, WindowFailure) as e:
        print(f"❌ Build failed: {e}", file=sys.stderr)
        return EXIT_BUILD
    except DerandomError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
