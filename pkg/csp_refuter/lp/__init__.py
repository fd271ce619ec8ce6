"""Fixed-marginal LPs, dominating polynomials, opt_t and independence tests."""

from csp_refuter.lp.independence import (
    IndependenceVerdict,
    is_t_wise_independent,
    pairwise_character_polynomial,
    pairwise_character_sum,
    polynomial_separator,
)
from csp_refuter.lp.net import marginal_net
from csp_refuter.lp.polynomials import DistributionTable, DominatingPolynomial, IndicatorPolynomial, val_t
from csp_refuter.lp.simplex import LPResult, solve_standard_form
from csp_refuter.lp.twise import OptTResult, opt_t, solve_dual, solve_dual_boolean, solve_primal

__all__ = [
    "DistributionTable",
    "DominatingPolynomial",
    "IndependenceVerdict",
    "IndicatorPolynomial",
    "LPResult",
    "OptTResult",
    "is_t_wise_independent",
    "marginal_net",
    "opt_t",
    "pairwise_character_polynomial",
    "pairwise_character_sum",
    "polynomial_separator",
    "solve_dual",
    "solve_dual_boolean",
    "solve_primal",
    "solve_standard_form",
    "val_t",
]
