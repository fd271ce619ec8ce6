"""Independent brute-force oracles and planted-distribution property checks."""

from csp_refuter.oracle.brute import brute_deviation_max, deviation_value, exhaustive_opt
from csp_refuter.oracle.empirical import EmpiricalOptReport, empirical_opt_check
from csp_refuter.oracle.lp import vertex_lp_optimum
from csp_refuter.oracle.planted import (
    PlantedDistribution,
    check_marginal_invariance,
    check_separator_independence,
    planted_distribution,
)
from csp_refuter.oracle.suite import VerificationReport, verify_certificate

__all__ = [
    "EmpiricalOptReport",
    "PlantedDistribution",
    "VerificationReport",
    "brute_deviation_max",
    "check_marginal_invariance",
    "check_separator_independence",
    "deviation_value",
    "empirical_opt_check",
    "exhaustive_opt",
    "planted_distribution",
    "verify_certificate",
    "vertex_lp_optimum",
]
