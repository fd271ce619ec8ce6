"""Verification tools - verify_certificate_file, brute_force_opt."""

import asyncio
import json
from pathlib import Path
from typing import Any, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.io import load_instance
from csp_refuter.oracle.brute import exhaustive_opt
from csp_refuter.oracle.suite import verify_certificate
from csp_refuter.refuter.certificate import RefutationCertificate

_config: Optional[RefuterConfig] = None


def set_config(cfg: RefuterConfig):
    global _config
    _config = cfg


async def verify_certificate_file(
    certificate: str,
    instance: str,
    output: Optional[str] = None,
) -> dict[str, Any]:
    """Run the oracle suite against a certificate and the instance it refutes.

    Args:
        certificate: Path of the certificate JSON.
        instance: Path of the instance JSON.
        output: Where to write the report JSON.

    Returns:
        dict: The pass/fail report.
    """
    text = await asyncio.to_thread(Path(certificate).read_text, encoding="utf-8")
    cert = RefutationCertificate.from_dict(json.loads(text))
    inst = await asyncio.to_thread(load_instance, instance)
    report = await asyncio.to_thread(verify_certificate, cert, inst, _config or config)
    data = report.to_dict()
    if output:
        await asyncio.to_thread(Path(output).write_text, json.dumps(data, indent=2) + "\n", encoding="utf-8")
        data["output"] = output
    return {"status": "success", "data": data}


async def brute_force_opt(instance: str) -> dict[str, Any]:
    """Exhaustive opt(I) in exact rationals, refused above the oracle cap.

    Args:
        instance: Path of the instance JSON.

    Returns:
        dict: The optimum as a float and a fraction string, with a witness.
    """
    inst = await asyncio.to_thread(load_instance, instance)
    value, witness = await asyncio.to_thread(exhaustive_opt, inst, _config or config)
    return {
        "status": "success",
        "data": {"opt": float(value), "fraction": str(value), "witness": list(witness)},
    }


TOOL_DEFINITIONS = [
    {
        "name": "verify_certificate_file",
        "description": "Check a refutation certificate against brute-force and LP oracles",
        "inputSchema": {
            "type": "object",
            "properties": {
                "certificate": {"type": "string", "description": "Certificate JSON path"},
                "instance": {"type": "string", "description": "Instance JSON path"},
                "output": {"type": "string", "description": "Report JSON output path"},
            },
            "required": ["certificate", "instance"],
        },
    },
    {
        "name": "brute_force_opt",
        "description": "Exhaustive optimum of a small instance in exact arithmetic",
        "inputSchema": {
            "type": "object",
            "properties": {
                "instance": {"type": "string", "description": "Instance JSON path"},
            },
            "required": ["instance"],
        },
    },
]
