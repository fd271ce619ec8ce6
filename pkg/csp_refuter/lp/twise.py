"""Fixed-marginal linear programs and the t-wise independent value opt_t.

For a predicate P on D^k, a marginal nu and 1 <= t <= k:

    primal:  max  sum_x P(x) mu(x)
             s.t. sum_{x_W = b} mu(x) = prod_{i in W} nu(b_i)   for all |W| = t
                  mu >= 0, sum mu = 1

    dual:    min  sum_{W,b} c_W(b) nu_W(b)
             s.t. sum_W c_W(x_W) >= P(x)   for all x in D^k

The dual is solved as its own LP so the returned polynomial is a vertex
(basic) solution, whose coefficients are bounded by Cramer's rule.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import MarginalVector, Relation, RelationFamily, assignments
from csp_refuter.errors import InvalidParameters, RefuterError, ResourceLimit, WrongMode
from csp_refuter.lp.net import grid_points, grid_size, net_point_count
from csp_refuter.lp.polynomials import (
    CONSTANT,
    DistributionTable,
    DominatingPolynomial,
    Key,
    val_t,
)
from csp_refuter.lp.simplex import OPTIMAL, solve_standard_form

logger = logging.getLogger(__name__)


def check_lp_parameters(rel: Relation, nu: MarginalVector, t: int, cfg: RefuterConfig) -> None:
    k, q = rel.arity, rel.domain_size
    if not 1 <= t <= k:
        raise InvalidParameters(f"need 1 <= t <= k, got t={t}, k={k}")
    if nu.q != q:
        raise InvalidParameters(f"marginal has {nu.q} entries, domain has {q}")
    if q ** k > cfg.lp_max_states:
        raise ResourceLimit("twise_lp", q ** k, cfg.lp_max_states)


def use_exact(rel: Relation, exact: Optional[bool], cfg: RefuterConfig) -> bool:
    if exact is not None:
        return exact
    return rel.domain_size ** rel.arity <= cfg.lp_exact_cap


def indicator_keys(k: int, q: int, t: int) -> list[Key]:
    """Constant term first, then every (W, b) with |W| = t in lexicographic order."""
    keys: list[Key] = [CONSTANT]
    for W in itertools.combinations(range(k), t):
        keys.extend((W, b) for b in assignments(q, t))
    return keys


def product_weight(nu: MarginalVector, b, exact: bool):
    p = nu.product_probability(b)
    return p if exact else float(p)


def matches(x, key: Key) -> int:
    W, b = key
    return int(all(x[i] == a for i, a in zip(W, b)))


def solve_primal(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> tuple:
    """Best satisfaction probability of a t-wise nu-independent distribution.

    Returns:
        tuple: (value, DistributionTable attaining it).
    """
    use_config = cfg or config
    check_lp_parameters(rel, nu, t, use_config)
    exact = use_exact(rel, exact, use_config)
    k, q = rel.arity, rel.domain_size
    points = list(assignments(q, k))

    keys = indicator_keys(k, q, t)
    A = [[matches(x, key) for x in points] for key in keys]
    rhs = [product_weight(nu, b, exact) for _, b in keys]
    costs = [-p for p in rel.predicate_vector()]

    result = solve_standard_form(costs, A, rhs, exact=exact, tolerance=use_config.pivot_tolerance)
    if result.status != OPTIMAL:
        raise RefuterError(f"primal LP unexpectedly {result.status}")
    probs = tuple(result.x) if exact else tuple(max(0.0, float(v)) for v in result.x)
    return -result.value, DistributionTable(k, q, probs)


def _solve_dominating(rel: Relation, columns: list, weights: list, exact: bool, cfg: RefuterConfig):
    """min weights.c subject to sum_j columns[j](x) c_j >= P(x), c free.

    columns[j] is the list of values of basis function j over D^k. Returns
    the coefficient vector c.
    """
    K = len(columns)
    states = len(rel.membership)
    costs = list(weights) + [-w for w in weights] + [0] * states
    A = []
    for s in range(states):
        row = [columns[j][s] for j in range(K)]
        surplus = [0] * states
        surplus[s] = -1
        A.append(row + [-v for v in row] + surplus)
    result = solve_standard_form(costs, A, rel.predicate_vector(), exact=exact, tolerance=cfg.pivot_tolerance)
    if result.status != OPTIMAL:
        raise RefuterError(f"dual LP unexpectedly {result.status}")
    return [result.x[j] - result.x[K + j] for j in range(K)]


def solve_dual(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> DominatingPolynomial:
    """Vertex-optimal dominating polynomial in the |W| = t indicator basis (plus constant)."""
    use_config = cfg or config
    check_lp_parameters(rel, nu, t, use_config)
    exact = use_exact(rel, exact, use_config)
    k, q = rel.arity, rel.domain_size
    points = list(assignments(q, k))

    keys = indicator_keys(k, q, t)
    columns = [[matches(x, key) for x in points] for key in keys]
    weights = [product_weight(nu, b, exact) for _, b in keys]
    solution = _solve_dominating(rel, columns, weights, exact, use_config)

    coefficients = {key: c for key, c in zip(keys, solution) if c != 0}
    return DominatingPolynomial(k, q, coefficients, t=t, marginal=nu, basis="indicator")


def character_subsets(k: int, t: int) -> list[tuple[int, ...]]:
    return [S for size in range(t + 1) for S in itertools.combinations(range(k), size)]


def character(x, S) -> int:
    """chi_S(x) = prod_{i in S} (1 - 2 x_i)."""
    return -1 if sum(x[i] for i in S) % 2 else 1


def solve_dual_boolean(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> DominatingPolynomial:
    """Boolean dual over the +-1 characters chi_S with |S| <= t.

    The objective is sum_S c_S (nu(0) - nu(1))^|S|. The solution is returned
    in the indicator basis, with the character form kept alongside.
    """
    use_config = cfg or config
    if rel.domain_size != 2:
        raise WrongMode(f"character basis needs a boolean domain, got q={rel.domain_size}")
    check_lp_parameters(rel, nu, t, use_config)
    exact = use_exact(rel, exact, use_config)
    k = rel.arity
    points = list(assignments(2, k))

    bias = nu.probs[0] - nu.probs[1]
    subsets = character_subsets(k, t)
    columns = [[character(x, S) for x in points] for S in subsets]
    weights = [bias ** len(S) if exact else float(bias) ** len(S) for S in subsets]
    solution = _solve_dominating(rel, columns, weights, exact, use_config)

    characters = {S: c for S, c in zip(subsets, solution) if c != 0}
    coefficients: dict = {}
    for S, c in characters.items():
        if not S:
            coefficients[CONSTANT] = coefficients.get(CONSTANT, 0) + c
            continue
        for b in assignments(2, len(S)):
            key = (S, b)
            coefficients[key] = coefficients.get(key, 0) + (-c if sum(b) % 2 else c)
    coefficients = {key: c for key, c in coefficients.items() if c != 0}
    return DominatingPolynomial(
        k, 2, coefficients, t=t, marginal=nu, basis="monomial", character_coefficients=characters
    )


def dominating_polynomial(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    basis: str = "indicator",
    exact: Optional[bool] = None,
    cfg: Optional[RefuterConfig] = None,
) -> DominatingPolynomial:
    if basis == "indicator":
        return solve_dual(rel, nu, t, exact, cfg)
    if basis == "monomial":
        return solve_dual_boolean(rel, nu, t, exact, cfg)
    raise InvalidParameters(f"Unknown basis: {basis}")


@dataclass
class OptTResult:
    """opt_t over a marginal grid together with its approximation guarantee."""

    value: object
    best_marginal: MarginalVector
    net_resolution: float
    per_point: list = field(default_factory=list)
    error_bound: float = 0.0
    max_dual_l1: float = 0.0
    t: int = 2
    exact: bool = True

    @property
    def net_points(self) -> int:
        return len(self.per_point)

    def to_dict(self) -> dict:
        return {
            "opt_t": float(self.value),
            "t": self.t,
            "exact": self.exact,
            "best_marginal": self.best_marginal.to_list(),
            "net_resolution": self.net_resolution,
            "net_points": self.net_points,
            "error_bound": self.error_bound,
            "max_dual_l1": self.max_dual_l1,
            "per_point": [{"nu": nu.to_list(), "value": float(v)} for nu, v in self.per_point],
        }


@dataclass
class _PointValue:
    value: object
    weighted_l1: float
    max_l1: float


def _evaluate_point(family: RelationFamily, nu: MarginalVector, t: int, exact: Optional[bool], cfg) -> _PointValue:
    value = 0
    weighted_l1 = 0.0
    max_l1 = 0.0
    for r, rel in enumerate(family.relations):
        weight = family.weights[r]
        if weight == 0:
            continue
        Q = solve_dual(rel, nu, t, exact, cfg)
        v = val_t(Q)
        value = value + (family.weight(r) * v if isinstance(v, Fraction) else weight * float(v))
        l1 = float(Q.l1_norm())
        weighted_l1 += weight * l1
        max_l1 = max(max_l1, l1)
    return _PointValue(value, weighted_l1, max_l1)


def opt_t(
    family: RelationFamily,
    t: int,
    epsilon: float,
    exact: Optional[bool] = None,
    net_step: Optional[float] = None,
    cfg: Optional[RefuterConfig] = None,
) -> OptTResult:
    """Maximize sum_R rho(R) val_t(Q_{R,nu}) over a simplex grid of marginals.

    Without net_step the grid is refined until t * B / N <= epsilon / 3, B
    being the largest rho-weighted dual l1 norm seen on the grid; every
    marginal is within l-infinity distance 1/N of a grid point, so the true
    opt_t lies in [value, value + error_bound].

    Raises:
        ResourceLimit: if the required grid exceeds the net cap.
    """
    use_config = cfg or config
    if epsilon <= 0:
        raise InvalidParameters(f"epsilon must be positive, got {epsilon}")
    k, q = family.k, family.q
    if not 1 <= t <= k:
        raise InvalidParameters(f"need 1 <= t <= k, got t={t}, k={k}")

    cache: dict = {}

    def evaluate(points: list[MarginalVector]) -> None:
        todo = [nu for nu in points if nu.probs not in cache]
        with ThreadPoolExecutor(max_workers=use_config.threads) as pool:
            results = list(pool.map(lambda nu: _evaluate_point(family, nu, t, exact, use_config), todo))
        for nu, res in zip(todo, results):
            cache[nu.probs] = res

    if net_step is not None:
        N = grid_size(net_step)
    else:
        probes = [MarginalVector.point_mass(q, a) for a in range(q)] + [MarginalVector.uniform(q)]
        evaluate(probes)
        B = max(cache[nu.probs].weighted_l1 for nu in probes)
        step = 1.0 / (2 * q) if B == 0 else min(epsilon / (3 * t * B), 1.0 / (2 * q))
        N = grid_size(step)

    while True:
        count = net_point_count(q, N)
        if count > use_config.net_cap:
            raise ResourceLimit("opt_t net", f"delta_net={1.0 / N:.3g} ({count} points)", use_config.net_cap)
        points = grid_points(q, N)
        evaluate(points)
        B = max(cache[nu.probs].weighted_l1 for nu in points)
        if net_step is not None or t * B / N <= epsilon / 3:
            break
        N = max(N + 1, math.ceil(3 * t * B / epsilon))
        logger.debug("opt_t refining net to N=%d (B=%.4g)", N, B)

    per_point = [(nu, cache[nu.probs].value) for nu in points]
    best_nu, best_value = per_point[0]
    for nu, v in per_point[1:]:
        if v > best_value:
            best_nu, best_value = nu, v

    exact_used = all(use_exact(rel, exact, use_config) for rel in family.relations)
    result = OptTResult(
        value=best_value,
        best_marginal=best_nu,
        net_resolution=1.0 / N,
        per_point=per_point,
        error_bound=t * B / N,
        max_dual_l1=max(cache[nu.probs].max_l1 for nu in points),
        t=t,
        exact=exact_used,
    )
    logger.info("opt_%d = %.6f over %d points (error <= %.3g)", t, float(best_value), len(points), result.error_bound)
    return result
