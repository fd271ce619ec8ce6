"""Benchmark tools - bench_norms."""

import asyncio
from pathlib import Path
from typing import Any, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.spectral.bench import BenchPoint, bench_norm_scaling, median_table, rows_to_dicts, write_csv

_config: Optional[RefuterConfig] = None


def set_config(cfg: RefuterConfig):
    global _config
    _config = cfg


def ratio_spread(table: list[dict]) -> Optional[float]:
    """Largest over smallest median ratio across a sweep."""
    ratios = [row["median_ratio"] for row in table if row["median_ratio"] > 0]
    if not ratios:
        return None
    return max(ratios) / min(ratios)


async def bench_norms(
    n: int,
    m_values: list[float],
    ell: int = 1,
    s_size: int = 2,
    seeds: int = 10,
    output: Optional[str] = None,
) -> dict[str, Any]:
    """Measure Kikuchi norms across an m sweep and compare with the predicted growth.

    Args:
        n: Number of variables.
        m_values: Expected constraint counts to sweep.
        ell: Kikuchi level.
        s_size: Size of S (even or odd operator by parity).
        seeds: Number of seeds per point.
        output: CSV output path.

    Returns:
        dict: Per-seed rows, per-point medians and the median-ratio spread.
    """
    points = [BenchPoint(n=n, m=m, ell=ell, S_size=s_size) for m in m_values]
    rows = await asyncio.to_thread(bench_norm_scaling, points, tuple(range(seeds)), _config or config)
    table = median_table(rows)
    data: dict[str, Any] = {
        "rows": rows_to_dicts(rows),
        "medians": table,
        "ratio_spread": ratio_spread(table),
    }
    if output:
        with Path(output).open("w", encoding="utf-8", newline="") as stream:
            write_csv(rows, stream)
        data["output"] = output
    return {"status": "success", "data": data}


TOOL_DEFINITIONS = [
    {
        "name": "bench_norms",
        "description": "Sweep Kikuchi spectral norms over m against their predicted growth",
        "inputSchema": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "description": "Number of variables"},
                "m_values": {"type": "array", "items": {"type": "number"}, "description": "Expected constraint counts"},
                "ell": {"type": "integer", "description": "Kikuchi level (default: 1)"},
                "s_size": {"type": "integer", "description": "Size of S (default: 2)"},
                "seeds": {"type": "integer", "description": "Seeds per point (default: 10)"},
                "output": {"type": "string", "description": "CSV output path"},
            },
            "required": ["n", "m_values"],
        },
    },
]
