"""LP tools - compute_opt_t, solve_relation_lp."""

import asyncio
from typing import Any, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import MarginalVector
from csp_refuter.errors import InvalidParameters
from csp_refuter.lp.polynomials import IndicatorPolynomial
from csp_refuter.lp.twise import dominating_polynomial, opt_t, solve_primal
from csp_refuter.tools.generate import resolve_family

_config: Optional[RefuterConfig] = None


def set_config(cfg: RefuterConfig):
    global _config
    _config = cfg


def polynomial_to_dict(f: IndicatorPolynomial) -> list[dict[str, Any]]:
    return [
        {"W": list(W), "b": list(b), "c": float(c)}
        for (W, b), c in sorted(f.coefficients.items(), key=lambda item: (len(item[0][0]), item[0]))
    ]


async def compute_opt_t(
    family: str,
    t: int = 2,
    epsilon: float = 0.1,
    exact: Optional[bool] = None,
    net_step: Optional[float] = None,
) -> dict[str, Any]:
    """Compute opt_t(rho) over a marginal grid.

    Args:
        family: Preset name or family JSON path.
        t: Independence order.
        epsilon: Target accuracy; drives the adaptive grid when net_step is omitted.
        exact: Force exact (true) or floating-point (false) LPs.
        net_step: Fixed grid step overriding the adaptive refinement.

    Returns:
        dict: opt_t, best marginal, net size, error bound and per-point table.
    """
    fam = resolve_family(family)
    result = await asyncio.to_thread(opt_t, fam, t, epsilon, exact, net_step, _config or config)
    return {"status": "success", "data": result.to_dict()}


async def solve_relation_lp(
    family: str,
    marginal: list[float],
    relation: int = 0,
    t: int = 2,
    basis: str = "indicator",
    exact: Optional[bool] = None,
) -> dict[str, Any]:
    """Solve the primal and dual fixed-marginal LPs of one relation.

    Args:
        family: Preset name or family JSON path.
        marginal: The marginal nu as a list of probabilities.
        relation: Relation index within the family.
        t: Independence order.
        basis: "indicator" or "monomial" (boolean only) for the dual.
        exact: Force exact (true) or floating-point (false) LPs.

    Returns:
        dict: Primal value, dual value, the dominating polynomial and its l1 norm.
    """
    fam = resolve_family(family)
    if not 0 <= relation < len(fam.relations):
        raise InvalidParameters(f"relation index {relation} out of range")
    rel = fam.relations[relation]
    nu = MarginalVector.from_floats(marginal)
    use_config = _config or config

    primal, mu = await asyncio.to_thread(solve_primal, rel, nu, t, exact, use_config)
    Q = await asyncio.to_thread(dominating_polynomial, rel, nu, t, basis, exact, use_config)
    return {
        "status": "success",
        "data": {
            "primal": float(primal),
            "dual": float(Q.val_t()),
            "l1_norm": float(Q.l1_norm()),
            "dominates": Q.dominates(rel),
            "polynomial": polynomial_to_dict(Q),
            "distribution": [float(p) for p in mu.probs],
        },
    }


TOOL_DEFINITIONS = [
    {
        "name": "compute_opt_t",
        "description": "Compute the t-wise independent value opt_t of a relation family",
        "inputSchema": {
            "type": "object",
            "properties": {
                "family": {"type": "string", "description": "Preset name or family JSON path"},
                "t": {"type": "integer", "description": "Independence order (default: 2)"},
                "epsilon": {"type": "number", "description": "Target accuracy (default: 0.1)"},
                "exact": {"type": "boolean", "description": "Exact rational LPs (default: by q^k)"},
                "net_step": {"type": "number", "description": "Fixed marginal grid step"},
            },
            "required": ["family"],
        },
    },
    {
        "name": "solve_relation_lp",
        "description": "Solve the fixed-marginal primal and dual LPs of one relation",
        "inputSchema": {
            "type": "object",
            "properties": {
                "family": {"type": "string", "description": "Preset name or family JSON path"},
                "marginal": {"type": "array", "items": {"type": "number"}, "description": "Marginal nu"},
                "relation": {"type": "integer", "description": "Relation index (default: 0)"},
                "t": {"type": "integer", "description": "Independence order (default: 2)"},
                "basis": {"type": "string", "enum": ["indicator", "monomial"], "description": "Dual basis"},
                "exact": {"type": "boolean", "description": "Exact rational LPs (default: by q^k)"},
            },
            "required": ["family", "marginal"],
        },
    },
]
