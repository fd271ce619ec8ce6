"""Independence tools - check_twise, find_separator."""

import asyncio
from typing import Any, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import MarginalVector
from csp_refuter.errors import InvalidParameters
from csp_refuter.lp.independence import NO, YES, is_t_wise_independent, polynomial_separator
from csp_refuter.tools.generate import resolve_family
from csp_refuter.tools.optimization import polynomial_to_dict

_config: Optional[RefuterConfig] = None


def set_config(cfg: RefuterConfig):
    global _config
    _config = cfg


async def check_twise(
    family: str,
    t: int = 2,
    tol: float = 1e-9,
    net_step: float = 0.1,
    exact: Optional[bool] = None,
) -> dict[str, Any]:
    """Tri-state t-wise independence test for every relation of a family.

    Args:
        family: Preset name or family JSON path.
        t: Independence order.
        tol: Minimum separator margin for a NO answer.
        net_step: Marginal grid step searched for witnesses.
        exact: Force exact (true) or floating-point (false) LPs.

    Returns:
        dict: Per-relation verdicts and an overall answer (yes only if all yes, no if any no).
    """
    fam = resolve_family(family)
    use_config = _config or config

    def run():
        return [
            is_t_wise_independent(rel, t, tol, net_step, exact, use_config)
            for rel in fam.relations
        ]

    verdicts = await asyncio.to_thread(run)
    answers = {v.answer for v in verdicts}
    overall = NO if NO in answers else (YES if answers == {YES} else "unknown")
    return {
        "status": "success",
        "data": {
            "t": t,
            "answer": overall,
            "relations": [{"index": r, **v.to_dict()} for r, v in enumerate(verdicts)],
        },
    }


async def find_separator(
    family: str,
    marginal: list[float],
    relation: int = 0,
    t: int = 2,
    exact: Optional[bool] = None,
) -> dict[str, Any]:
    """Search for a degree-t polynomial separating a relation from every t-wise nu-independent distribution.

    Args:
        family: Preset name or family JSON path.
        marginal: The marginal nu as a list of probabilities.
        relation: Relation index within the family.
        t: Degree of the separator.
        exact: Force exact (true) or floating-point (false) LPs.

    Returns:
        dict: found flag and the separator's indicator-basis coefficients.
    """
    fam = resolve_family(family)
    if not 0 <= relation < len(fam.relations):
        raise InvalidParameters(f"relation index {relation} out of range")
    rel = fam.relations[relation]
    nu = MarginalVector.from_floats(marginal)
    f = await asyncio.to_thread(polynomial_separator, rel, nu, t, exact, _config or config)
    data: dict[str, Any] = {"found": f is not None, "polynomial": None}
    if f is not None:
        data["polynomial"] = polynomial_to_dict(f)
        data["expectation"] = float(f.expectation(nu))
        data["min_on_relation"] = min(float(f.evaluate(a)) for a in rel.satisfying())
    return {"status": "success", "data": data}


TOOL_DEFINITIONS = [
    {
        "name": "check_twise",
        "description": "Test every relation of a family for t-wise independence (yes/no/unknown)",
        "inputSchema": {
            "type": "object",
            "properties": {
                "family": {"type": "string", "description": "Preset name or family JSON path"},
                "t": {"type": "integer", "description": "Independence order (default: 2)"},
                "tol": {"type": "number", "description": "Minimum separator margin (default: 1e-9)"},
                "net_step": {"type": "number", "description": "Marginal grid step (default: 0.1)"},
                "exact": {"type": "boolean", "description": "Exact rational LPs (default: by q^k)"},
            },
            "required": ["family"],
        },
    },
    {
        "name": "find_separator",
        "description": "Find a degree-t polynomial positive on a relation with zero nu-expectation",
        "inputSchema": {
            "type": "object",
            "properties": {
                "family": {"type": "string", "description": "Preset name or family JSON path"},
                "marginal": {"type": "array", "items": {"type": "number"}, "description": "Marginal nu"},
                "relation": {"type": "integer", "description": "Relation index (default: 0)"},
                "t": {"type": "integer", "description": "Separator degree (default: 2)"},
                "exact": {"type": "boolean", "description": "Exact rational LPs (default: by q^k)"},
            },
            "required": ["family", "marginal"],
        },
    },
]
