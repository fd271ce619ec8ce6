"""End-to-end refutation: heavy split, deviation certificates, marginal enumeration.

For a relation r with realized count m_r, expected count m_exp_r and any
polynomial Q dominating its predicate, every assignment x with value counts
N satisfies

    Pr_{sigma in C_r}[x_sigma in R] <= c_0 + sum_{W,b} c_W(b) Pr_sigma[x_sigma(W) = b]

and, exactly,

    Pr_sigma[x_sigma(W) = b] = C_{W,b}(x) / m_r + (m_exp_r / m_r) * pi_{W,b}(N)

where pi_{W,b}(N) is the probability that a uniform ordered tuple of |W|
distinct variables reads b. The deviation part is bounded by certificates;
the rest depends on x only through N. When every count vector can be
enumerated the bound is evaluated at each of them; otherwise a simplex grid
is used and the distance to the grid is charged as itemized slack.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Instance, MarginalVector, Relation, assignments
from csp_refuter.csp.io import instance_digest
from csp_refuter.errors import InvalidParameters, ResourceLimit, UndefinedValue, WrongMode
from csp_refuter.kikuchi.operators import check_level, minimum_level
from csp_refuter.kikuchi.tensor import build_deviation_tensor
from csp_refuter.lp.net import compositions, grid_size, marginal_net, net_point_count
from csp_refuter.lp.polynomials import CONSTANT, DominatingPolynomial
from csp_refuter.lp.twise import dominating_polynomial, use_exact
from csp_refuter.refuter.certificate import (
    STATUS_BAD,
    STATUS_CERTIFIED,
    STATUS_LIGHT,
    RefutationCertificate,
    RelationStatus,
)
from csp_refuter.refuter.heavy import heavy_split, heavy_threshold
from csp_refuter.services.cache_service import (
    CacheService,
    deviation_key,
    dual_key,
    get_cache_service,
    init_cache_service,
)
from csp_refuter.spectral.certify import (
    CERTIFIED,
    HEURISTIC,
    NON_CONVERGED,
    DeviationCertificate,
    certify_combined,
    certify_deviation,
    round_up,
)

logger = logging.getLogger(__name__)

INDICATOR = "indicator"
MONOMIAL = "monomial"
EXACT_COUNTS = "exact-counts"
GRID = "grid"

SLACK_ITEMS = (
    "deviation",
    "edge_ratio",
    "net_lipschitz",
    "ordered_tuple",
    "dominance_repair",
    "cap_adjustment",
)


def certified_sizes(mode: str, t: int) -> tuple[int, ...]:
    """Scope sizes carrying dual coefficients: t (indicator) or 1..t (monomial)."""
    return (t,) if mode == INDICATOR else tuple(range(1, t + 1))


def default_level(t: int, mode: str = INDICATOR) -> int:
    """Smallest ell legal for every exercised |S|."""
    return max([1] + [minimum_level(s) for s in certified_sizes(mode, t) if s >= 2])


def check_refute_parameters(inst: Instance, t: int, ell: int, epsilon: float, mode: str) -> None:
    k, q = inst.k, inst.q
    if not 2 <= t <= k:
        raise InvalidParameters(f"need 2 <= t <= k, got t={t}, k={k}")
    if epsilon <= 0:
        raise InvalidParameters(f"epsilon must be positive, got {epsilon}")
    if mode not in (INDICATOR, MONOMIAL):
        raise InvalidParameters(f"Unknown refutation mode: {mode}")
    if mode == MONOMIAL and q != 2:
        raise WrongMode(f"monomial mode needs a boolean domain, got q={q}")
    if ell < 1:
        raise InvalidParameters(f"ell must be positive, got {ell}")
    for s in certified_sizes(mode, t):
        if s >= 2:
            check_level(s, ell)
    if inst.m == 0:
        raise UndefinedValue("cannot refute an instance without constraints")


def without_replacement_probability(counts: Sequence[int], b: Sequence[int]) -> Fraction:
    """Probability that a uniform ordered tuple of len(b) distinct variables reads b."""
    n = sum(counts)
    hits = 1
    for a, c in Counter(b).items():
        hits *= math.perm(counts[a], c)
    return Fraction(hits, math.perm(n, len(b)))


@dataclass(frozen=True)
class MarginalPoint:
    nu: MarginalVector
    counts: Optional[tuple[int, ...]] = None


@dataclass
class SplitPolynomial:
    """A dual solution in exact arithmetic: constant, per-W coefficients, dominance repair."""

    constant: Fraction
    terms: dict
    val_t: Fraction
    repair: Fraction = Fraction(0)
    l1: Fraction = Fraction(0)

    def nonconstant_expectation(self, nu: MarginalVector) -> Fraction:
        return sum(
            (c * nu.product_probability(b) for coeffs in self.terms.values() for b, c in coeffs.items()),
            Fraction(0),
        )


def _split(Q: DominatingPolynomial, rel: Relation) -> SplitPolynomial:
    constant = Fraction(0)
    terms: dict = {}
    for (W, b), c in sorted(Q.coefficients.items()):
        c = Fraction(c)
        if (W, b) == CONSTANT:
            constant += c
        elif c != 0:
            terms.setdefault(W, {})[b] = c
    split = SplitPolynomial(constant=constant, terms=terms, val_t=Fraction(0))
    split.val_t = constant + split.nonconstant_expectation(Q.marginal)
    split.l1 = sum((abs(c) for coeffs in terms.values() for c in coeffs.values()), Fraction(0))

    gap = Fraction(0)
    for x, member in zip(assignments(rel.domain_size, rel.arity), rel.membership):
        value = constant + sum(
            (coeffs.get(tuple(x[i] for i in W), Fraction(0)) for W, coeffs in terms.items()),
            Fraction(0),
        )
        gap = max(gap, int(member) - value)
    split.repair = gap
    return split


def _coefficient_key(coeffs: dict) -> tuple:
    return tuple(sorted(coeffs.items()))


def _resolve_cache(cfg: RefuterConfig) -> Optional[CacheService]:
    if not cfg.cache_url:
        return None
    service = get_cache_service()
    if service is None or service.url != cfg.cache_url:
        service = init_cache_service(cfg.cache_url)
    return service


def _dual_payload(Q: DominatingPolynomial) -> dict:
    return {
        "coefficients": [[list(W), list(b), str(c)] for (W, b), c in sorted(Q.coefficients.items())],
        "characters": [[list(S), str(c)] for S, c in sorted(Q.character_coefficients.items())],
        "exact": all(isinstance(c, Fraction) for c in Q.coefficients.values()),
    }


def _dual_from_payload(payload: dict, rel: Relation, nu: MarginalVector, t: int, basis: str) -> DominatingPolynomial:
    parse = Fraction if payload["exact"] else float
    return DominatingPolynomial(
        rel.arity,
        rel.domain_size,
        {(tuple(W), tuple(b)): parse(c) for W, b, c in payload["coefficients"]},
        t=t,
        marginal=nu,
        basis=basis,
        character_coefficients={tuple(S): parse(c) for S, c in payload["characters"]},
    )


@dataclass
class _Context:
    inst: Instance
    t: int
    ell: int
    basis: str
    exact: Optional[bool]
    norm_mode: Optional[str]
    seed: int
    cfg: RefuterConfig
    cache: Optional[CacheService]
    digest: str
    duals: dict = field(default_factory=dict)

    def pool(self) -> ThreadPoolExecutor:
        return ThreadPoolExecutor(max_workers=self.cfg.threads)

    def solve_duals(self, relations: Sequence[int], points: Sequence[MarginalPoint]) -> None:
        todo = [(r, p.nu) for p in points for r in relations if (r, p.nu.probs) not in self.duals]
        with self.pool() as pool:
            results = list(pool.map(lambda job: self._dual(*job), todo))
        for (r, nu), split in zip(todo, results):
            self.duals[(r, nu.probs)] = split

    def _dual(self, r: int, nu: MarginalVector) -> SplitPolynomial:
        rel = self.inst.family.relations[r]
        key = None
        if self.cache is not None:
            exact = use_exact(rel, self.exact, self.cfg)
            key = dual_key(rel.membership, rel.domain_size, nu.probs, self.t, self.basis, exact)
            payload = self.cache.get_dual(key)
            if payload is not None:
                return _split(_dual_from_payload(payload, rel, nu, self.t, self.basis), rel)
        Q = dominating_polynomial(rel, nu, self.t, self.basis, self.exact, self.cfg)
        if key is not None:
            self.cache.put_dual(key, self.basis, _dual_payload(Q))
        return _split(Q, rel)

    def certify(self, job: tuple) -> DeviationCertificate:
        r, W, beta, coeffs, tensors = job
        key = None
        if self.cache is not None:
            key = deviation_key(self.digest, r, W, beta, self.ell, self.norm_mode or "auto", coeffs)
            cached = self.cache.get_deviation(key)
            if cached is not None:
                return DeviationCertificate.from_dict(cached)
        tensor = tensors[(r, W)]
        if coeffs is None:
            cert = certify_deviation(
                self.inst, r, W, beta, self.ell, self.norm_mode, self.seed, tensor=tensor, cfg=self.cfg
            )
        else:
            cert = certify_combined(
                self.inst, r, W, coeffs, self.ell, self.norm_mode, self.seed, tensor=tensor, cfg=self.cfg
            )
        if key is not None:
            self.cache.put_deviation(key, self.digest, r, cert.to_dict())
        return cert


def _grid_points(q: int, step: float, cfg: RefuterConfig) -> list[MarginalPoint]:
    return [MarginalPoint(nu) for nu in marginal_net(q, step, cfg=cfg)]


def _weighted_l1(ctx: _Context, relations: Sequence[int], weights: dict, points: Sequence[MarginalPoint]) -> Fraction:
    return max(
        (sum((weights[r] * ctx.duals[(r, p.nu.probs)].l1 for r in relations), Fraction(0)) for p in points),
        default=Fraction(0),
    )


def _marginal_points(
    ctx: _Context,
    relations: Sequence[int],
    weights: dict,
    epsilon: float,
    net_step: Optional[float],
) -> tuple[str, int, list[MarginalPoint]]:
    """Pick exact count vectors when they fit under the net cap, else a refined simplex grid.

    Returns:
        tuple: (net kind, grid resolution N (n for count vectors), points).
    """
    inst, cfg, t = ctx.inst, ctx.cfg, ctx.t
    n, q = inst.n, inst.q
    if net_step is None and net_point_count(q, n) <= cfg.net_cap:
        points = [MarginalPoint(MarginalVector.from_counts(c), c) for c in compositions(n, q)]
        ctx.solve_duals(relations, points)
        return EXACT_COUNTS, n, points

    if net_step is not None:
        N = grid_size(net_step)
    else:
        probes = [MarginalPoint(MarginalVector.point_mass(q, a)) for a in range(q)]
        probes.append(MarginalPoint(MarginalVector.uniform(q)))
        ctx.solve_duals(relations, probes)
        B = float(_weighted_l1(ctx, relations, weights, probes))
        step = 1.0 / (2 * q) if B == 0 else min(epsilon / (3 * t * B), 1.0 / (2 * q))
        N = grid_size(step)

    while True:
        count = net_point_count(q, N)
        if count > cfg.net_cap:
            raise ResourceLimit("refute net", f"delta_net={1.0 / N:.3g} ({count} points)", cfg.net_cap)
        points = _grid_points(q, 1.0 / N, cfg)
        ctx.solve_duals(relations, points)
        B = float(_weighted_l1(ctx, relations, weights, points))
        if net_step is not None or t * B / N <= epsilon / 3:
            return GRID, N, points
        N = max(N + 1, math.ceil(3 * t * B / epsilon))
        logger.debug("refute refining net to N=%d (B=%.4g)", N, B)


@dataclass
class _PointEvaluation:
    point: MarginalPoint
    total: Fraction
    values: dict
    items: dict


def _evaluate_point(
    point: MarginalPoint,
    relations: Sequence[int],
    weights: dict,
    ratios: dict,
    deviations: dict,
    duals: dict,
    N: int,
    n: int,
    fixed_mass: Fraction,
) -> _PointEvaluation:
    items = {name: Fraction(0) for name in SLACK_ITEMS}
    values = {}
    total = fixed_mass
    h = Fraction(1, N)
    for r in relations:
        Q = duals[(r, point.nu.probs)]
        ratio = ratios[r]
        A = Q.nonconstant_expectation(point.nu)
        dev = deviations[(r, point.nu.probs)]
        if point.counts is not None:
            E = sum(
                (c * without_replacement_probability(point.counts, b)
                 for coeffs in Q.terms.values() for b, c in coeffs.items()),
                Fraction(0),
            )
            lipschitz = Fraction(0)
            ordered = ratio * (E - A)
        else:
            lipschitz = ratio * sum(
                (len(W) * h * sum(abs(c) for c in coeffs.values()) for W, coeffs in Q.terms.items()),
                Fraction(0),
            )
            ordered = ratio * sum(
                (Fraction(len(W) * (len(W) - 1), n) * max(abs(c) for c in coeffs.values())
                 for W, coeffs in Q.terms.items()),
                Fraction(0),
            )
        edge = (ratio - 1) * A
        term = Q.val_t + Q.repair + edge + lipschitz + ordered + dev
        capped = min(Fraction(1), term)
        w = weights[r]
        items["deviation"] += w * dev
        items["edge_ratio"] += w * edge
        items["net_lipschitz"] += w * lipschitz
        items["ordered_tuple"] += w * ordered
        items["dominance_repair"] += w * Q.repair
        items["cap_adjustment"] += w * (capped - term)
        values[r] = Q.val_t
        total += w * capped
    return _PointEvaluation(point=point, total=total, values=values, items=items)


def refute(
    inst: Instance,
    t: int,
    ell: int,
    epsilon: float,
    mode: str = INDICATOR,
    norm_mode: Optional[str] = None,
    net_step: Optional[float] = None,
    exact: Optional[bool] = None,
    seed: int = 0,
    combine: bool = True,
    cfg: Optional[RefuterConfig] = None,
) -> RefutationCertificate:
    """Certify an upper bound on max_x Val(x) of the form opt_t + slack.

    Args:
        inst: Instance with at least one constraint.
        t: Independence order, 2 <= t <= k.
        ell: Kikuchi level, legal for every exercised |S|.
        epsilon: Error budget, split in thirds between light mass, certification and net.
        mode: "indicator" (|S| = t) or "monomial" (boolean, 1 <= |S| <= t).
        norm_mode: "exact", "estimate" or None to pick per operator by the dense cap.
        net_step: Force a simplex grid with this step instead of exact count vectors.
        exact: Force exact (True) or float (False) LPs; None decides by q^k.
        seed: Seed of every power-iteration start.
        combine: Also certify sum_b c_W(b) C_{W,b} directly for |W| = 1 and even |W|.

    Returns:
        RefutationCertificate: bound and audit trail.

    Raises:
        InvalidParameters: illegal (t, ell, epsilon, mode).
        ResourceLimit: net, index space or tensor over its cap.
    """
    use_config = cfg or config
    check_refute_parameters(inst, t, ell, epsilon, mode)
    q, k, n, m = inst.q, inst.k, inst.n, inst.m

    ctx = _Context(
        inst=inst,
        t=t,
        ell=ell,
        basis=mode,
        exact=exact,
        norm_mode=norm_mode,
        seed=seed,
        cfg=use_config,
        cache=_resolve_cache(use_config),
        digest=instance_digest(inst),
    )

    # Step 0: heavy/light split
    delta = heavy_threshold(epsilon, q, k)
    split = heavy_split(inst, delta)
    heavy = list(split.heavy_indices)
    weights = {r: split.masses[r] for r in heavy}
    ratios = {}
    for r in heavy:
        sub = split.heavy[r]
        ratios[r] = Fraction(sub.m_expected) / sub.m

    # Step 2 (duals first, they decide which (S, beta) need certificates)
    kind, N, points = _marginal_points(ctx, heavy, weights, epsilon, net_step)

    # Step 1: deviation certificates
    tensors = {}
    per_beta = set()
    combined = set()
    for p in points:
        for r in heavy:
            for W, coeffs in ctx.duals[(r, p.nu.probs)].terms.items():
                if (r, W) not in tensors:
                    tensors[(r, W)] = build_deviation_tensor(inst, W, r)
                per_beta.update((r, W, b) for b in coeffs)
                if combine and len(coeffs) > 1 and (len(W) == 1 or len(W) % 2 == 0):
                    combined.add((r, W, _coefficient_key(coeffs)))
    jobs = [(r, W, b, None, tensors) for r, W, b in sorted(per_beta)]
    jobs += [(r, W, None, dict(key), tensors) for r, W, key in sorted(combined)]
    with ctx.pool() as pool:
        certificates = list(pool.map(ctx.certify, jobs))

    beta_bounds = {}
    combined_bounds = {}
    by_relation: dict = {r: [] for r in heavy}
    for job, cert in zip(jobs, certificates):
        r, W, b, coeffs, _ = job
        by_relation[r].append(cert)
        if coeffs is None:
            beta_bounds[(r, W, b)] = Fraction(cert.bound)
        else:
            combined_bounds[(r, W, _coefficient_key(coeffs))] = Fraction(cert.bound)

    bad = [r for r in heavy if any(c.status == NON_CONVERGED for c in by_relation[r])]
    good = [r for r in heavy if r not in bad]
    bad_mass = sum((weights[r] for r in bad), Fraction(0))
    if bad:
        logger.warning("relations %s charged 1: norm estimates did not converge", bad)

    deviations = {}
    for p in points:
        for r in good:
            total = Fraction(0)
            for W, coeffs in ctx.duals[(r, p.nu.probs)].terms.items():
                separate = sum((abs(c) * beta_bounds[(r, W, b)] for b, c in coeffs.items()), Fraction(0))
                joint = combined_bounds.get((r, W, _coefficient_key(coeffs)))
                total += separate if joint is None else min(separate, joint)
            deviations[(r, p.nu.probs)] = total

    # Step 3: maximize over marginals
    fixed_mass = split.light_mass + bad_mass
    evaluations = [
        _evaluate_point(p, good, weights, ratios, deviations, ctx.duals, N, n, fixed_mass)
        for p in points
    ]
    best = evaluations[0]
    for ev in evaluations[1:]:
        if ev.total > best.total:
            best = ev
    bound = round_up(best.total)

    base = fixed_mass + sum((weights[r] * best.values[r] for r in good), Fraction(0))
    slack = {name: float(value) for name, value in best.items.items()}
    slack["total"] = float(best.total - base)

    used = [c for r in good for c in by_relation[r]]
    soundness = HEURISTIC if any(c.status == HEURISTIC for c in used) else CERTIFIED

    max_l1 = {
        r: float(max(ctx.duals[(r, p.nu.probs)].l1 + abs(ctx.duals[(r, p.nu.probs)].constant) for p in points))
        for r in heavy
    }
    pairs = max(1, len(per_beta))
    per_certificate = epsilon / 3 / (pairs * max([1.0] + list(max_l1.values())))
    over_budget = sum(1 for r, W, b in per_beta if float(beta_bounds[(r, W, b)]) > per_certificate)

    relations = []
    for r, mass in enumerate(split.masses):
        if mass == 0:
            continue
        sub_m = sum(1 for c in inst.constraints if c.relation_index == r)
        status = STATUS_LIGHT if r in split.light else (STATUS_BAD if r in bad else STATUS_CERTIFIED)
        relations.append(RelationStatus(
            index=r,
            mass=float(mass),
            status=status,
            m=sub_m,
            m_expected=inst.m_expected * inst.family.weights[r],
            max_dual_l1=max_l1.get(r),
            certificates=[c.certificate_id for c in by_relation.get(r, [])],
        ))

    certificate = RefutationCertificate(
        instance_digest=ctx.digest,
        n=n,
        m=m,
        q=q,
        k=k,
        t=t,
        ell=ell,
        epsilon=epsilon,
        mode=mode,
        heavy_threshold=delta,
        bound=bound,
        soundness_mode=soundness,
        relations=relations,
        net={"kind": kind, "resolution": N, "delta_net": 1.0 / N, "points": len(points)},
        per_point=[
            {
                "nu": ev.point.nu.to_list(),
                "counts": list(ev.point.counts) if ev.point.counts is not None else None,
                "values": {str(r): float(v) for r, v in ev.values.items()},
                "bound": float(ev.total),
            }
            for ev in evaluations
        ],
        deviation_certificates=certificates,
        best_marginal=best.point.nu.to_list(),
        light_mass=float(split.light_mass),
        bad_mass=float(bad_mass),
        slack=slack,
        budget={
            "light": epsilon / 3,
            "certification": epsilon / 3,
            "net": epsilon / 3,
            "light_used": float(split.light_mass),
            "certification_used": slack["deviation"],
            "net_used": slack["net_lipschitz"] + slack["ordered_tuple"],
            "per_certificate": per_certificate,
            "certificates_over_budget": over_budget,
        },
    )
    logger.info(
        "refuted n=%d m=%d: bound %.6f (%s, %d certificates, %d marginal points)",
        n, m, bound, soundness, len(certificates), len(points),
    )
    return certificate
