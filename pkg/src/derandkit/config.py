"""
Build configuration.

Library entry points take an optional BuildConfig; only load_config() looks at
the environment (after loading a .env file, if present).
"""

import logging
import os
from dataclasses import dataclass, replace
from typing import Any, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

THREADS_ENV = "DERANDOM_THREADS"
SEED_ENV = "DERANDOM_SEED"
POOL_BUDGET_ENV = "DERANDOM_POOL_BUDGET"


@dataclass(frozen=True)
class BuildConfig:
    """
    Knobs shared by all builders.

    Attributes:
        exhaustive_limit: Candidate pools up to this size are enumerated in full.
        sample_size: Size of the seeded sample drawn when a pool is too large.
        seed: Seed for sampled pools and sampled oracle pre-checks.
        workers: Worker threads for candidate scoring and independent sub-builds.
        max_intermediate: Cap on the intermediate codomain of composed splitters.
        granularity: Interval boundary grid step; None means ceil(n / (4k)).
        allow_out_of_regime: Let composed_splitter run below ell >= k^3.
        guess_budget: Maximum number of interval plans enumerated.
        max_family_size: Maximum number of functions an interval build may emit.
        reservoir: Reservoir size for interval builds; None picks it automatically.
        chunk_elements: Upper bound on elements touched per scoring chunk.
    """

    exhaustive_limit: int = 1_000_000
    sample_size: int = 100_000
    seed: int = 0
    workers: int = 1
    max_intermediate: int = 4096
    granularity: Optional[int] = None
    allow_out_of_regime: bool = False
    guess_budget: int = 10_000
    max_family_size: int = 500_000
    reservoir: Optional[int] = None
    chunk_elements: int = 4_000_000

    def with_overrides(self, **overrides: Any) -> "BuildConfig":
        """Return a copy with the non-None overrides applied."""
        clean = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **clean) if clean else self


DEFAULT_CONFIG = BuildConfig()


def resolve_workers(raw: int) -> int:
    """0 (or negative) means one worker per CPU."""
    if raw <= 0:
        return os.cpu_count() or 1
    return raw


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        return int(value)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", name, value)
        return None


def load_config(**overrides: Any) -> BuildConfig:
    """
    Build a config from the environment, then apply explicit overrides.

    Reads DERANDOM_THREADS (0 = auto), DERANDOM_SEED and DERANDOM_POOL_BUDGET.
    """
    load_dotenv()
    threads = _env_int(THREADS_ENV)
    env_values = {
        "workers": resolve_workers(threads if threads is not None else 0),
        "seed": _env_int(SEED_ENV),
        "exhaustive_limit": _env_int(POOL_BUDGET_ENV),
    }
    config = DEFAULT_CONFIG.with_overrides(**env_values)
    return config.with_overrides(**overrides)
