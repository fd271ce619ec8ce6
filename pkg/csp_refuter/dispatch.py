"""Tool registry and dispatcher."""

import json
import logging
from typing import Any, Optional

from pydantic import ValidationError

from csp_refuter.config import RefuterConfig
from csp_refuter.errors import (
    InvalidParameters,
    PreconditionViolation,
    RefuterError,
    ResourceLimit,
    WrongMode,
)
from csp_refuter.tools import benchmark, generate, independence, optimization, refutation, verification

logger = logging.getLogger(__name__)

USAGE = "usage"
RESOURCE = "resource"
IO = "io"
INTERNAL = "internal"

TOOL_MODULES = [generate, optimization, independence, refutation, benchmark, verification]

TOOL_HANDLERS = {
    # Instances
    "generate_instance": generate.generate_instance,
    "list_family_presets": generate.list_family_presets,
    "describe_instance": generate.describe_instance,
    # LPs
    "compute_opt_t": optimization.compute_opt_t,
    "solve_relation_lp": optimization.solve_relation_lp,
    # Independence
    "check_twise": independence.check_twise,
    "find_separator": independence.find_separator,
    # Refutation
    "refute_instance": refutation.refute_instance,
    "summarize_certificate": refutation.summarize_certificate,
    # Benchmarks
    "bench_norms": benchmark.bench_norms,
    # Verification
    "verify_certificate_file": verification.verify_certificate_file,
    "brute_force_opt": verification.brute_force_opt,
}

ALL_TOOL_DEFINITIONS = (
    generate.TOOL_DEFINITIONS +
    optimization.TOOL_DEFINITIONS +
    independence.TOOL_DEFINITIONS +
    refutation.TOOL_DEFINITIONS +
    benchmark.TOOL_DEFINITIONS +
    verification.TOOL_DEFINITIONS
)


def configure_tools(cfg: Optional[RefuterConfig]):
    """Point every tool module at one configuration (None restores the global one)."""
    for module in TOOL_MODULES:
        module.set_config(cfg)


def error_category(error: Exception) -> str:
    if isinstance(error, ResourceLimit):
        return RESOURCE
    if isinstance(error, (InvalidParameters, WrongMode, PreconditionViolation, TypeError)):
        return USAGE
    if isinstance(error, (OSError, json.JSONDecodeError, ValidationError, KeyError)):
        return IO
    if isinstance(error, (RefuterError, ValueError)):
        return USAGE
    return INTERNAL


async def execute_tool(tool_name: str, arguments: dict[str, Any]) -> dict[str, Any]:
    """Execute a tool by name with given arguments.

    Args:
        tool_name: Name of the tool to execute.
        arguments: Arguments to pass to the tool.

    Returns:
        dict: Tool result, or an error envelope with error_type and category.
    """
    handler = TOOL_HANDLERS.get(tool_name)
    if not handler:
        return {"status": "error", "error": f"Unknown tool: {tool_name}", "error_type": "UnknownTool", "category": USAGE}
    try:
        return await handler(**arguments)
    except Exception as e:
        category = error_category(e)
        if category == INTERNAL:
            logger.exception("tool %s failed", tool_name)
        else:
            logger.debug("tool %s failed: %s", tool_name, e)
        return {"status": "error", "error": str(e), "error_type": type(e).__name__, "category": category}
