"""Configuration module using Pydantic Settings."""

import os
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class RefuterConfig(BaseSettings):
    """Refuter configuration with environment variable validation."""

    # Exhaustive search caps (number of assignments q^n)
    cap_states: int = Field(2 ** 24, alias="REFUTER_CAP_STATES")
    oracle_cap: int = Field(2 ** 20, alias="REFUTER_ORACLE_CAP")

    # Kikuchi operators
    dense_cap: int = Field(4000, alias="REFUTER_DENSE_CAP")
    index_cap: int = Field(2_000_000, alias="REFUTER_INDEX_CAP")
    tensor_cap: int = Field(2 ** 24, alias="REFUTER_TENSOR_CAP")

    # Marginal nets
    net_cap: int = Field(20_000, alias="REFUTER_NET_CAP")

    # Linear programs
    lp_exact_cap: int = Field(256, alias="REFUTER_LP_EXACT_CAP")
    lp_max_states: int = Field(4096, alias="REFUTER_LP_MAX_STATES")
    pivot_tolerance: float = Field(1e-10, alias="REFUTER_PIVOT_TOLERANCE")

    # Spectral norms
    power_tolerance: float = Field(1e-9, alias="REFUTER_POWER_TOLERANCE")
    power_safety: float = Field(1.05, alias="REFUTER_POWER_SAFETY")
    eig_agreement: float = Field(1e-10, alias="REFUTER_EIG_AGREEMENT")

    # Execution
    threads: int = Field(
        default_factory=lambda: os.cpu_count() or 1,
        alias="REFUTER_THREADS",
    )

    # Certificate cache (disabled when unset)
    cache_url: Optional[str] = Field(None, alias="REFUTER_CACHE_URL")

    log_level: str = Field("WARNING", alias="REFUTER_LOG_LEVEL")

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
        "populate_by_name": True,
    }


def load_config() -> RefuterConfig:
    """Load and validate configuration from environment variables."""
    config = RefuterConfig()

    caps = {
        "REFUTER_CAP_STATES": config.cap_states,
        "REFUTER_ORACLE_CAP": config.oracle_cap,
        "REFUTER_DENSE_CAP": config.dense_cap,
        "REFUTER_INDEX_CAP": config.index_cap,
        "REFUTER_TENSOR_CAP": config.tensor_cap,
        "REFUTER_NET_CAP": config.net_cap,
        "REFUTER_LP_EXACT_CAP": config.lp_exact_cap,
        "REFUTER_LP_MAX_STATES": config.lp_max_states,
        "REFUTER_THREADS": config.threads,
    }
    bad = [name for name, value in caps.items() if value <= 0]
    if bad:
        raise ValueError(f"Caps must be positive: {', '.join(bad)}")
    if config.power_safety < 1.0:
        raise ValueError("REFUTER_POWER_SAFETY must be at least 1.0")

    return config


# Global config instance
config = load_config()
