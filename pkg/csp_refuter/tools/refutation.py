"""Refutation tools - refute_instance, summarize_certificate."""

import asyncio
import json
from pathlib import Path
from typing import Any, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.io import load_instance
from csp_refuter.refuter.certificate import RefutationCertificate
from csp_refuter.refuter.pipeline import INDICATOR, default_level, refute

_config: Optional[RefuterConfig] = None


def set_config(cfg: RefuterConfig):
    global _config
    _config = cfg


def certificate_summary(cert: RefutationCertificate) -> dict[str, Any]:
    return {
        "bound": cert.bound,
        "soundness_mode": cert.soundness_mode,
        "heuristic": cert.heuristic,
        "t": cert.t,
        "ell": cert.ell,
        "epsilon": cert.epsilon,
        "mode": cert.mode,
        "best_marginal": cert.best_marginal,
        "net": cert.net,
        "light_mass": cert.light_mass,
        "bad_mass": cert.bad_mass,
        "slack": cert.slack,
        "certificates": len(cert.deviation_certificates),
        "relations": {str(r.index): r.status for r in cert.relations},
    }


async def refute_instance(
    instance: str,
    t: int = 2,
    epsilon: float = 0.2,
    ell: Optional[int] = None,
    mode: str = INDICATOR,
    norm_mode: Optional[str] = None,
    net_step: Optional[float] = None,
    exact: Optional[bool] = None,
    seed: int = 0,
    combine: bool = True,
    output: Optional[str] = None,
) -> dict[str, Any]:
    """Certify an upper bound of the form opt_t + slack on an instance's value.

    Args:
        instance: Path of the instance JSON.
        t: Independence order.
        epsilon: Error budget.
        ell: Kikuchi level; defaults to the smallest legal level for (t, mode).
        mode: "indicator" or "monomial" (boolean domains only).
        norm_mode: "exact", "estimate", or omitted to choose per operator.
        net_step: Force a simplex grid with this step.
        exact: Force exact (true) or floating-point (false) LPs.
        seed: Seed of the power-iteration starts.
        combine: Certify each dual polynomial's deviation directly as well as per assignment.
        output: Where to write the certificate JSON; inlined in the result when omitted.

    Returns:
        dict: Certificate summary (and the certificate without an output path).
    """
    inst = await asyncio.to_thread(load_instance, instance)
    level = ell if ell is not None else default_level(t, mode)
    cert = await asyncio.to_thread(
        refute, inst, t, level, epsilon, mode, norm_mode, net_step, exact, seed, combine, _config or config
    )
    data = certificate_summary(cert)
    if output:
        await asyncio.to_thread(Path(output).write_text, cert.dumps(), encoding="utf-8")
        data["output"] = output
    else:
        data["certificate"] = cert.to_dict()
    return {"status": "success", "data": data}


async def summarize_certificate(certificate: str) -> dict[str, Any]:
    """Summarize a certificate file without re-checking it.

    Args:
        certificate: Path of the certificate JSON.

    Returns:
        dict: Bound, soundness mode, slack and relation statuses.
    """
    text = await asyncio.to_thread(Path(certificate).read_text, encoding="utf-8")
    cert = RefutationCertificate.from_dict(json.loads(text))
    return {"status": "success", "data": certificate_summary(cert)}


TOOL_DEFINITIONS = [
    {
        "name": "refute_instance",
        "description": "Produce a spectral refutation certificate bounding an instance's value",
        "inputSchema": {
            "type": "object",
            "properties": {
                "instance": {"type": "string", "description": "Instance JSON path"},
                "t": {"type": "integer", "description": "Independence order (default: 2)"},
                "epsilon": {"type": "number", "description": "Error budget (default: 0.2)"},
                "ell": {"type": "integer", "description": "Kikuchi level (default: smallest legal)"},
                "mode": {"type": "string", "enum": ["indicator", "monomial"], "description": "Polynomial basis"},
                "norm_mode": {"type": "string", "enum": ["exact", "estimate"], "description": "Spectral norm mode"},
                "net_step": {"type": "number", "description": "Force a marginal grid with this step"},
                "exact": {"type": "boolean", "description": "Exact rational LPs (default: by q^k)"},
                "seed": {"type": "integer", "description": "Power-iteration seed (default: 0)"},
                "combine": {"type": "boolean", "description": "Also certify combined polynomials (default: true)"},
                "output": {"type": "string", "description": "Certificate JSON output path"},
            },
            "required": ["instance"],
        },
    },
    {
        "name": "summarize_certificate",
        "description": "Summarize a refutation certificate file",
        "inputSchema": {
            "type": "object",
            "properties": {
                "certificate": {"type": "string", "description": "Certificate JSON path"},
            },
            "required": ["certificate"],
        },
    },
]
