"""Refuter tools - one module per CLI subcommand."""

from csp_refuter.tools import (
    benchmark,
    generate,
    independence,
    optimization,
    refutation,
    verification,
)

__all__ = [
    "benchmark",
    "generate",
    "independence",
    "optimization",
    "refutation",
    "verification",
]
