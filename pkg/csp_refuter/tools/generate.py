"""Instance tools - generate_instance, list_family_presets, describe_instance."""

import asyncio
from pathlib import Path
from typing import Any, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import RelationFamily
from csp_refuter.csp.evaluate import brute_opt, empirical_relation_distribution
from csp_refuter.csp.io import instance_digest, instance_to_dict, load_family, load_instance, save_instance
from csp_refuter.csp.relations import PRESETS, preset_family
from csp_refuter.csp.sampling import sample_instance
from csp_refuter.errors import ResourceLimit

_config: Optional[RefuterConfig] = None


def set_config(cfg: RefuterConfig):
    global _config
    _config = cfg


def resolve_family(family: str) -> RelationFamily:
    """A preset name, or the path of a family JSON file."""
    path = Path(family)
    if path.suffix == ".json" or path.exists():
        return load_family(path)
    return preset_family(family)


def _summary(inst) -> dict[str, Any]:
    return {
        "n": inst.n,
        "m": inst.m,
        "m_expected": inst.m_expected,
        "q": inst.q,
        "k": inst.k,
        "seed": inst.seed,
        "relations": len(inst.family.relations),
        "digest": instance_digest(inst),
    }


async def generate_instance(
    family: str,
    n: int,
    m: float,
    seed: int = 0,
    output: Optional[str] = None,
) -> dict[str, Any]:
    """Sample a random instance with m expected constraints.

    Args:
        family: Preset name (neq, eq, nae3, one-in-three, xor3, full, neq3) or family JSON path.
        n: Number of variables.
        m: Expected number of constraints.
        seed: Seed of every random draw.
        output: Where to write the instance JSON; inlined in the result when omitted.

    Returns:
        dict: Instance summary (and the instance document without an output path).
    """
    fam = resolve_family(family)
    inst = await asyncio.to_thread(sample_instance, fam, n, m, seed)
    data = _summary(inst)
    if output:
        await asyncio.to_thread(save_instance, inst, output)
        data["output"] = output
    else:
        data["instance"] = instance_to_dict(inst)
    return {"status": "success", "data": data}


async def list_family_presets() -> dict[str, Any]:
    """List the built-in relation family presets.

    Returns:
        dict: Preset names with domain size, arity and relation count.
    """
    presets = []
    for name in sorted(PRESETS):
        fam = preset_family(name)
        presets.append({"name": name, "q": fam.q, "k": fam.k, "relations": len(fam.relations)})
    return {"status": "success", "data": presets}


async def describe_instance(instance: str, exhaustive: bool = False) -> dict[str, Any]:
    """Summarize an instance file, optionally with its exact optimum.

    Args:
        instance: Path of the instance JSON.
        exhaustive: Also compute opt(I) by exhaustive search when q^n is within the state cap.

    Returns:
        dict: Summary, empirical relation distribution and optionally opt.
    """
    inst = await asyncio.to_thread(load_instance, instance)
    data = _summary(inst)
    data["relation_distribution"] = [float(p) for p in empirical_relation_distribution(inst)]
    if exhaustive:
        try:
            value, witness = await asyncio.to_thread(brute_opt, inst, _config or config)
            data["opt"] = float(value)
            data["witness"] = list(witness.values)
        except ResourceLimit as e:
            data["opt"] = None
            data["opt_skipped"] = str(e)
    return {"status": "success", "data": data}


TOOL_DEFINITIONS = [
    {
        "name": "generate_instance",
        "description": "Sample a random k-CSP instance from a relation family",
        "inputSchema": {
            "type": "object",
            "properties": {
                "family": {"type": "string", "description": "Preset name or family JSON path"},
                "n": {"type": "integer", "description": "Number of variables"},
                "m": {"type": "number", "description": "Expected number of constraints"},
                "seed": {"type": "integer", "description": "Random seed (default: 0)"},
                "output": {"type": "string", "description": "Instance JSON output path"},
            },
            "required": ["family", "n", "m"],
        },
    },
    {
        "name": "list_family_presets",
        "description": "List the built-in relation family presets",
        "inputSchema": {
            "type": "object",
            "properties": {},
        },
    },
    {
        "name": "describe_instance",
        "description": "Summarize an instance file, optionally with its exhaustive optimum",
        "inputSchema": {
            "type": "object",
            "properties": {
                "instance": {"type": "string", "description": "Instance JSON path"},
                "exhaustive": {"type": "boolean", "description": "Compute opt(I) exhaustively (default: false)"},
            },
            "required": ["instance"],
        },
    },
]
