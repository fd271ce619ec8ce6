"""Spectral norms, deviation certificates and norm-scaling benchmarks."""

from csp_refuter.spectral.bench import BenchPoint, BenchRow, bench_norm_scaling, predicted_norm
from csp_refuter.spectral.certify import DeviationCertificate, certify_combined, certify_deviation
from csp_refuter.spectral.norms import NormEstimate, spectral_norm

__all__ = [
    "BenchPoint",
    "BenchRow",
    "DeviationCertificate",
    "NormEstimate",
    "bench_norm_scaling",
    "certify_combined",
    "certify_deviation",
    "predicted_norm",
    "spectral_norm",
]
