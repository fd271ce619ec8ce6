"""Built-in relations and families used by the CLI presets and the tests."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from csp_refuter.csp.domain import DomainSpec, Relation, RelationFamily, assignments
from csp_refuter.errors import InvalidParameters


def not_equal(q: int = 2) -> Relation:
    return Relation.from_predicate(q, 2, lambda x: x[0] != x[1])


def equality(q: int = 2, k: int = 2) -> Relation:
    return Relation.from_predicate(q, k, lambda x: len(set(x)) == 1)


def not_all_equal(q: int = 2, k: int = 3) -> Relation:
    return Relation.from_predicate(q, k, lambda x: len(set(x)) > 1)


def one_in_k(k: int = 3) -> Relation:
    return Relation.from_predicate(2, k, lambda x: sum(x) == 1)


def xor(k: int = 3, parity: int = 0) -> Relation:
    return Relation.from_predicate(2, k, lambda x: sum(x) % 2 == parity)


def full(q: int = 2, k: int = 2) -> Relation:
    return Relation.from_predicate(q, k, lambda x: True)


def empty(q: int = 2, k: int = 2) -> Relation:
    return Relation.from_predicate(q, k, lambda x: False)


def random_relation(q: int, k: int, density: float, rng: np.random.Generator) -> Relation:
    """Each tuple of D^k is included independently with probability density."""
    keep = rng.random(q ** k) < density
    return Relation(arity=k, domain_size=q, membership=tuple(bool(b) for b in keep))


def single_family(relation: Relation, labels: Optional[tuple[str, ...]] = None) -> RelationFamily:
    domain = DomainSpec(relation.domain_size, labels) if labels else DomainSpec.of_size(relation.domain_size)
    return RelationFamily(domain=domain, relations=(relation,), weights=(1.0,))


def mixed_family(relations: list[Relation], weights: list[float]) -> RelationFamily:
    q = relations[0].domain_size
    return RelationFamily(domain=DomainSpec.of_size(q), relations=tuple(relations), weights=tuple(weights))


def literal_family(base: Relation) -> RelationFamily:
    """All shifts {Q + b : b in Z_q^k} of a base predicate, uniformly weighted."""
    q, k = base.domain_size, base.arity
    shifted: dict[tuple[bool, ...], Relation] = {}
    satisfying = base.satisfying()
    for b in assignments(q, k):
        rel = Relation.from_tuples(q, k, (tuple((x[i] + b[i]) % q for i in range(k)) for x in satisfying))
        shifted.setdefault(rel.membership, rel)
    relations = tuple(shifted[key] for key in sorted(shifted))
    weight = 1.0 / len(relations)
    weights = [weight] * len(relations)
    weights[-1] = 1.0 - weight * (len(relations) - 1)
    return RelationFamily(domain=DomainSpec.of_size(q), relations=relations, weights=tuple(weights))


PRESETS: dict[str, Callable[[], RelationFamily]] = {
    "neq": lambda: single_family(not_equal(2)),
    "eq": lambda: single_family(equality(2, 2)),
    "nae3": lambda: single_family(not_all_equal(2, 3)),
    "one-in-three": lambda: single_family(one_in_k(3)),
    "xor3": lambda: mixed_family([xor(3, 0), xor(3, 1)], [0.5, 0.5]),
    "full": lambda: single_family(full(2, 2)),
    "neq3": lambda: single_family(not_equal(3)),
}


def preset_family(name: str) -> RelationFamily:
    try:
        return PRESETS[name]()
    except KeyError:
        raise InvalidParameters(f"Unknown family preset: {name} (choose from {', '.join(sorted(PRESETS))})")
