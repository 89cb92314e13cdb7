"""Shared fixtures"""

import pytest

from derandkit.config import BuildConfig


@pytest.fixture
def small_config():
    """Budgets small enough for the whole suite to run in seconds."""
    return BuildConfig(exhaustive_limit=20_000, sample_size=2_000, seed=0)
