"""Refutation pipeline: heavy split, certification, marginal enumeration, certificate assembly."""

from csp_refuter.lp.net import marginal_net
from csp_refuter.refuter.certificate import CERTIFICATE_SCHEMA, RefutationCertificate, RelationStatus
from csp_refuter.refuter.heavy import HeavySplit, heavy_split, heavy_threshold
from csp_refuter.refuter.pipeline import INDICATOR, MONOMIAL, default_level, refute

__all__ = [
    "CERTIFICATE_SCHEMA",
    "HeavySplit",
    "INDICATOR",
    "MONOMIAL",
    "RefutationCertificate",
    "RelationStatus",
    "default_level",
    "heavy_split",
    "heavy_threshold",
    "marginal_net",
    "refute",
]
