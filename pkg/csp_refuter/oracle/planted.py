"""Canonical planted distributions and their distributional properties.

mu_J(b) is proportional to prod_C f_C(b restricted to C) * nu^V(b), where
f_C = mu^C / nu^k is the density of the constraint's t-wise nu-independent
distribution. Everything is a dense exact table over D^n.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import networkx as nx

from csp_refuter.config import RefuterConfig
from csp_refuter.csp.domain import Instance, MarginalVector
from csp_refuter.errors import DegenerateInstance, InvalidParameters, PreconditionViolation
from csp_refuter.oracle.brute import all_assignments, check_states

logger = logging.getLogger(__name__)


def _product(nu: MarginalVector, values: Sequence[int]) -> Fraction:
    out = Fraction(1)
    for a in values:
        out *= nu.probs[a]
    return out


def density_table(density, q: int, k: int) -> dict[tuple[int, ...], Fraction]:
    """Accept a mapping tuple -> mass or any object with row-major .probs."""
    if hasattr(density, "probs"):
        return {x: Fraction(p) for x, p in zip(itertools.product(range(q), repeat=k), density.probs)}
    table = {x: Fraction(0) for x in itertools.product(range(q), repeat=k)}
    for x, p in density.items():
        table[tuple(x)] = Fraction(p)
    return table


def check_independent(table: Mapping[tuple, Fraction], nu: MarginalVector, t: int, k: int) -> bool:
    """Every size-t marginal of the table equals nu^t, exactly."""
    if sum(table.values()) != 1 or any(p < 0 for p in table.values()):
        return False
    for W in itertools.combinations(range(k), t):
        marginal: dict = {}
        for x, p in table.items():
            key = tuple(x[i] for i in W)
            marginal[key] = marginal.get(key, Fraction(0)) + p
        for local in itertools.product(range(nu.q), repeat=t):
            if marginal.get(local, Fraction(0)) != _product(nu, local):
                return False
    return True


@dataclass
class PlantedDistribution:
    instance: Instance
    marginal: MarginalVector
    table: dict = field(default_factory=dict)
    normalizer: Fraction = Fraction(1)

    def project(self, variables: Sequence[int]) -> dict[tuple[int, ...], Fraction]:
        out: dict = {}
        for b, p in self.table.items():
            if p:
                key = tuple(b[v] for v in variables)
                out[key] = out.get(key, Fraction(0)) + p
        return out


def planted_distribution(
    J: Instance,
    densities: Mapping[int, object],
    nu: MarginalVector,
    t: int = 2,
    cfg: Optional[RefuterConfig] = None,
) -> PlantedDistribution:
    """mu_J for per-relation distributions mu^C (keyed by relation index).

    Raises:
        PreconditionViolation: a supplied distribution is not t-wise nu-independent.
        DegenerateInstance: the normalizer vanishes.
    """
    q, k, n = J.q, J.k, J.n
    if nu.q != q:
        raise InvalidParameters(f"marginal has {nu.q} entries, domain has {q}")
    check_states(q, n, cfg, "planted_distribution")

    ratios = {}
    for r in sorted({c.relation_index for c in J.constraints}):
        if r not in densities:
            raise InvalidParameters(f"no distribution supplied for relation {r}")
        table = density_table(densities[r], q, k)
        if not check_independent(table, nu, t, k):
            raise PreconditionViolation(f"distribution of relation {r} is not {t}-wise nu-independent")
        ratios[r] = {x: (p / _product(nu, x) if _product(nu, x) else Fraction(0)) for x, p in table.items()}

    weights = {}
    for b in all_assignments(n, q):
        w = _product(nu, b)
        if w:
            for c in J.constraints:
                w *= ratios[c.relation_index][tuple(b[v] for v in c.scope)]
                if not w:
                    break
        weights[b] = w
    Z = sum(weights.values(), Fraction(0))
    if Z == 0:
        raise DegenerateInstance("planted distribution has zero normalizer")
    return PlantedDistribution(
        instance=J,
        marginal=nu,
        table={b: w / Z for b, w in weights.items()},
        normalizer=Z,
    )


def _without(J: Instance, index: int) -> Instance:
    return Instance(
        n=J.n,
        constraints=tuple(c for i, c in enumerate(J.constraints) if i != index),
        family=J.family,
        seed=J.seed,
        m_expected=J.m_expected,
    )


def check_marginal_invariance(
    J: Instance,
    S: Sequence[int],
    C: int,
    densities: Mapping[int, object],
    nu: MarginalVector,
    t: int = 2,
    cfg: Optional[RefuterConfig] = None,
) -> bool:
    """pi_S(mu_J) == pi_S(mu_{J minus C}) for constraint number C, exactly.

    Raises:
        PreconditionViolation: C shares more than t variables with the rest of J and S.
    """
    if not 0 <= C < J.m:
        raise InvalidParameters(f"constraint index {C} out of range")
    scope = set(J.constraints[C].scope)
    rest = {v for i, c in enumerate(J.constraints) if i != C for v in c.scope}
    overlap = scope & (rest | set(S))
    if len(overlap) > t:
        raise PreconditionViolation(f"constraint {C} overlaps {len(overlap)} > t = {t} variables")
    S = tuple(S)
    full = planted_distribution(J, densities, nu, t, cfg).project(S)
    reduced = planted_distribution(_without(J, C), densities, nu, t, cfg).project(S)
    return full == reduced


def clique_graph(J: Instance) -> nx.Graph:
    """Variables joined whenever they share a constraint."""
    graph = nx.Graph()
    graph.add_nodes_from(range(J.n))
    for c in J.constraints:
        graph.add_edges_from(itertools.combinations(c.scope, 2))
    return graph


def is_separator(J: Instance, S: Sequence[int], T: Sequence[int], R: Sequence[int]) -> bool:
    removed = set(R)
    left = [v for v in S if v not in removed]
    right = [v for v in T if v not in removed]
    if set(left) & set(right):
        return False
    graph = clique_graph(J).subgraph(v for v in range(J.n) if v not in removed)
    return not any(nx.has_path(graph, a, b) for a in left for b in right)


def check_separator_independence(
    J: Instance,
    S: Sequence[int],
    T: Sequence[int],
    R: Sequence[int],
    densities: Mapping[int, object],
    nu: MarginalVector,
    t: int = 2,
    cfg: Optional[RefuterConfig] = None,
) -> bool:
    """x_S and x_T are conditionally independent given x_R under mu_J, exactly.

    Raises:
        PreconditionViolation: R does not separate S from T in the clique graph.
    """
    if not is_separator(J, S, T, R):
        raise PreconditionViolation(f"R={tuple(R)} does not separate S={tuple(S)} from T={tuple(T)}")
    R = tuple(R)
    left = tuple(v for v in S if v not in R)
    right = tuple(v for v in T if v not in R)
    mu = planted_distribution(J, densities, nu, t, cfg)

    joint = mu.project(R + left + right)
    on_r = mu.project(R)
    with_left = mu.project(R + left)
    with_right = mu.project(R + right)
    q = J.q
    for r, p_r in on_r.items():
        if not p_r:
            continue
        for a in itertools.product(range(q), repeat=len(left)):
            p_ra = with_left.get(r + a, Fraction(0))
            for b in itertools.product(range(q), repeat=len(right)):
                p_rab = joint.get(r + a + b, Fraction(0))
                if p_rab * p_r != p_ra * with_right.get(r + b, Fraction(0)):
                    return False
    return True
