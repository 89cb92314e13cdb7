"""Tests for environment-driven configuration"""

import os

import pytest

from derandkit.config import DEFAULT_CONFIG, BuildConfig, load_config, resolve_workers


@pytest.fixture
def clean_env(monkeypatch):
    for name in ("DERANDOM_THREADS", "DERANDOM_SEED", "DERANDOM_POOL_BUDGET"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def test_defaults(clean_env):
    """Without environment values the defaults apply"""
    config = load_config()
    assert config.seed == DEFAULT_CONFIG.seed
    assert config.exhaustive_limit == DEFAULT_CONFIG.exhaustive_limit
    assert config.workers == (os.cpu_count() or 1)


def test_environment_values(clean_env):
    """DERANDOM_* variables set workers, seed and pool budget"""
    clean_env.setenv("DERANDOM_THREADS", "3")
    clean_env.setenv("DERANDOM_SEED", "17")
    clean_env.setenv("DERANDOM_POOL_BUDGET", "5000")
    config = load_config()
    assert (config.workers, config.seed, config.exhaustive_limit) == (3, 17, 5000)


def test_overrides_win(clean_env):
    """Explicit overrides beat the environment"""
    clean_env.setenv("DERANDOM_SEED", "17")
    config = load_config(seed=4, granularity=2, allow_out_of_regime=None)
    assert config.seed == 4
    assert config.granularity == 2
    # None overrides leave the field alone
    assert config.allow_out_of_regime is False


def test_non_integer_values_are_ignored(clean_env):
    """Unparseable or empty values fall back to defaults"""
    clean_env.setenv("DERANDOM_SEED", "seven")
    clean_env.setenv("DERANDOM_POOL_BUDGET", "")
    config = load_config()
    assert config.seed == DEFAULT_CONFIG.seed
    assert config.exhaustive_limit == DEFAULT_CONFIG.exhaustive_limit


@pytest.mark.parametrize("raw", [0, -2])
def test_resolve_workers_auto(raw):
    """Zero or negative means one worker per CPU"""
    assert resolve_workers(raw) == (os.cpu_count() or 1)


def test_resolve_workers_explicit():
    """Positive counts are kept"""
    assert resolve_workers(5) == 5


def test_with_overrides_returns_same_object_when_empty():
    """All-None overrides return the same config"""
    config = BuildConfig(seed=9)
    assert config.with_overrides(seed=None) is config
    assert config.with_overrides(seed=1).seed == 1
