"""t-wise independence of a single predicate and low-degree separators.

A predicate R is t-wise independent when some marginal nu admits a
distribution on R whose size-t marginals all equal nu^t. The search is
bilinear in (nu, mu), so the answer is tri-state: a feasible grid point
proves YES; a separator with enough margin at every grid point proves NO.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import MarginalVector, Relation, assignments
from csp_refuter.lp.net import grid_size, marginal_net
from csp_refuter.lp.polynomials import DistributionTable, IndicatorPolynomial
from csp_refuter.lp.simplex import OPTIMAL, solve_standard_form
from csp_refuter.lp.twise import check_lp_parameters, indicator_keys, matches, product_weight, use_exact

logger = logging.getLogger(__name__)

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass
class IndependenceVerdict:
    answer: str
    marginal: Optional[MarginalVector] = None
    distribution: Optional[DistributionTable] = None
    net_step: float = 0.0
    net_points: int = 0
    min_margin: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "marginal": self.marginal.to_list() if self.marginal else None,
            "distribution": [float(p) for p in self.distribution.probs] if self.distribution else None,
            "net_step": self.net_step,
            "net_points": self.net_points,
            "min_margin": self.min_margin,
        }


def supported_distribution(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> Optional[DistributionTable]:
    """A t-wise nu-independent distribution supported in R, or None."""
    use_config = cfg or config
    check_lp_parameters(rel, nu, t, use_config)
    exact = use_exact(rel, exact, use_config)
    k, q = rel.arity, rel.domain_size
    support = rel.satisfying()
    if not support:
        return None

    keys = indicator_keys(k, q, t)
    A = [[matches(x, key) for x in support] for key in keys]
    rhs = [product_weight(nu, b, exact) for _, b in keys]
    result = solve_standard_form([0] * len(support), A, rhs, exact=exact, tolerance=use_config.pivot_tolerance)
    if result.status != OPTIMAL:
        return None

    mass = dict(zip(support, result.x))
    zero = Fraction(0) if exact else 0.0
    probs = tuple(
        (mass.get(x, zero) if exact else max(0.0, float(mass.get(x, zero))))
        for x in assignments(q, k)
    )
    return DistributionTable(k, q, probs)


def separator_margin(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    restrict_to_support: bool = True,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> tuple:
    """Largest s such that some f in the |W| = t indicator span with all |c| <= 1
    has E_{nu^k} f = 0 and f(a) >= s on R (on R within supp(nu)^k when
    restrict_to_support). s is capped at 1.

    Returns:
        tuple: (margin s, the polynomial f attaining it).
    """
    use_config = cfg or config
    check_lp_parameters(rel, nu, t, use_config)
    exact = use_exact(rel, exact, use_config)
    k, q = rel.arity, rel.domain_size
    keys = indicator_keys(k, q, t)[1:]
    K = len(keys)

    support = set(nu.support())
    rows_at = [
        a for a in rel.satisfying()
        if not restrict_to_support or all(v in support for v in a)
    ]
    R = len(rows_at)
    # columns: c+ (K), c- (K), s, surplus per row (R), box slacks (2K), s slack
    width = 2 * K + 1 + R + 2 * K + 1
    s_col = 2 * K
    A, b = [], []

    weights = [product_weight(nu, key[1], exact) for key in keys]
    row = [0] * width
    for j, w in enumerate(weights):
        row[j] = w
        row[K + j] = -w
    A.append(row)
    b.append(0)

    for r, a in enumerate(rows_at):
        row = [0] * width
        for j, key in enumerate(keys):
            hit = matches(a, key)
            row[j] = hit
            row[K + j] = -hit
        row[s_col] = -1
        row[s_col + 1 + r] = -1
        A.append(row)
        b.append(0)

    box = s_col + 1 + R
    for j in range(2 * K):
        row = [0] * width
        row[j] = 1
        row[box + j] = 1
        A.append(row)
        b.append(1)
    row = [0] * width
    row[s_col] = 1
    row[width - 1] = 1
    A.append(row)
    b.append(1)

    costs = [0] * width
    costs[s_col] = -1
    result = solve_standard_form(costs, A, b, exact=exact, tolerance=use_config.pivot_tolerance)
    if result.status != OPTIMAL:
        return 0, None
    coefficients = {}
    for j, key in enumerate(keys):
        c = result.x[j] - result.x[K + j]
        if c != 0:
            coefficients[key] = c
    return -result.value, IndicatorPolynomial(k, q, coefficients)


def polynomial_separator(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> Optional[IndicatorPolynomial]:
    """Degree-t f with E_{nu^k} f = 0 and f > 0 on R, or None if nu^k-style support exists.

    Only points of R inside supp(nu)^k are constrained, since no t-wise
    nu-independent distribution charges anything else.
    """
    use_config = cfg or config
    margin, f = separator_margin(rel, nu, t, True, exact, use_config)
    tol = 0 if use_exact(rel, exact, use_config) else use_config.pivot_tolerance
    return f if margin > tol else None


def _search_order(points: list[MarginalVector], q: int) -> list[MarginalVector]:
    uniform = MarginalVector.uniform(q)
    return [uniform] + [nu for nu in points if nu.probs != uniform.probs]


def is_t_wise_independent(
    rel: Relation,
    t: int,
    tol: float = 1e-9,
    net_step: float = 0.1,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> IndependenceVerdict:
    """Tri-state test of t-wise independence over a marginal grid.

    YES: some grid point (uniform first, then lexicographic) is feasible.
    NO: at every grid point a separator f, positive on all of R, has margin
    above t * h * ||f||_1 (h the grid step), so it also rules out every
    marginal within distance h.
    """
    use_config = cfg or config
    q = rel.domain_size
    points = _search_order(marginal_net(q, net_step, cfg=use_config), q)
    h = 1.0 / grid_size(net_step)

    for nu in points:
        mu = supported_distribution(rel, nu, t, exact, use_config)
        if mu is not None:
            logger.debug("t-wise witness at nu=%s", nu.to_list())
            return IndependenceVerdict(YES, nu, mu, h, len(points))

    min_margin = None
    for nu in points:
        margin, f = separator_margin(rel, nu, t, False, exact, use_config)
        slack = float(margin) - t * h * float(f.l1_norm()) if f is not None else -1.0
        min_margin = slack if min_margin is None else min(min_margin, slack)
        if f is None or float(margin) <= tol or slack <= 0:
            return IndependenceVerdict(UNKNOWN, net_step=h, net_points=len(points), min_margin=min_margin)
    return IndependenceVerdict(NO, net_step=h, net_points=len(points), min_margin=min_margin)


def pairwise_character_sum(a) -> int:
    """sum_{i<j} (1 - 2a_i)(1 - 2a_j) for a 0/1 string, in closed form ((k-2r)^2 - k)/2."""
    values = np.asarray(a, dtype=np.int64)
    k = values.shape[-1]
    r = values.sum(axis=-1)
    return ((k - 2 * r) ** 2 - k) // 2


def pairwise_character_polynomial(k: int) -> IndicatorPolynomial:
    """The same function as an indicator-basis polynomial over pairs."""
    coefficients = {}
    for i in range(k):
        for j in range(i + 1, k):
            for b in assignments(2, 2):
                coefficients[((i, j), b)] = 1 if b[0] == b[1] else -1
    return IndicatorPolynomial(k, 2, coefficients)


def sample_biased_strings(k: int, count: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """count strings from the product measure with Pr[a_i = 1] = p, one per row."""
    return (rng.random((count, k)) < p).astype(np.int64)


def low_weight_strings(strings: np.ndarray, p: float) -> np.ndarray:
    k = strings.shape[1]
    return strings[strings.sum(axis=1) <= 2 * p * k]


def separates_low_weight(strings: np.ndarray, p: float) -> bool:
    """True when the pairwise character sum is positive on every string of weight <= 2pk."""
    kept = low_weight_strings(strings, p)
    return bool(np.all(pairwise_character_sum(kept) > 0))
