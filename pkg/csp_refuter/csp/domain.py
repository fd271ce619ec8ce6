"""Core CSP types: domains, relations, families, constraints, instances, assignments, marginals."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from csp_refuter.errors import InvalidParameters

WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """Finite domain D with q = size labelled values."""

    size: int
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.size < 1:
            raise InvalidParameters(f"domain size must be >= 1, got {self.size}")
        if len(self.labels) != self.size:
            raise InvalidParameters("need exactly one label per domain value")
        if len(set(self.labels)) != self.size:
            raise InvalidParameters("domain labels must be distinct")

    @classmethod
    def of_size(cls, q: int) -> DomainSpec:
        return cls(size=q, labels=tuple(str(a) for a in range(q)))


def assignments(q: int, k: int) -> Iterator[tuple[int, ...]]:
    """All of D^k in row-major order (first coordinate most significant)."""
    return itertools.product(range(q), repeat=k)


def tuple_index(x: Sequence[int], q: int) -> int:
    index = 0
    for value in x:
        index = index * q + int(value)
    return index


@dataclass(frozen=True)
class Relation:
    """A k-ary relation over D stored as a row-major membership table."""

    arity: int
    domain_size: int
    membership: tuple[bool, ...]

    def __post_init__(self):
        if self.arity < 2:
            raise InvalidParameters(f"relation arity must be >= 2, got {self.arity}")
        if len(self.membership) != self.domain_size ** self.arity:
            raise InvalidParameters(
                f"membership table has {len(self.membership)} entries, "
                f"expected {self.domain_size ** self.arity}"
            )

    @classmethod
    def from_tuples(cls, q: int, k: int, tuples: Iterable[Sequence[int]]) -> Relation:
        table = [False] * (q ** k)
        for x in tuples:
            if len(x) != k or any(not 0 <= a < q for a in x):
                raise InvalidParameters(f"tuple {tuple(x)} is not in D^{k} for q={q}")
            table[tuple_index(x, q)] = True
        return cls(arity=k, domain_size=q, membership=tuple(table))

    @classmethod
    def from_predicate(cls, q: int, k: int, predicate: Callable[[tuple[int, ...]], bool]) -> Relation:
        return cls(arity=k, domain_size=q, membership=tuple(bool(predicate(x)) for x in assignments(q, k)))

    @cached_property
    def table(self) -> np.ndarray:
        return np.array(self.membership, dtype=bool)

    def index(self, x: Sequence[int]) -> int:
        return tuple_index(x, self.domain_size)

    def contains(self, x: Sequence[int]) -> bool:
        return self.membership[self.index(x)]

    def satisfying(self) -> list[tuple[int, ...]]:
        """Satisfying tuples in lexicographic order."""
        return [x for x, member in zip(assignments(self.domain_size, self.arity), self.membership) if member]

    @property
    def size(self) -> int:
        return sum(self.membership)

    @property
    def is_full(self) -> bool:
        return all(self.membership)

    def predicate_vector(self) -> list[int]:
        return [1 if member else 0 for member in self.membership]


@dataclass(frozen=True)
class RelationFamily:
    """Relations of a common arity together with the sampling distribution rho."""

    domain: DomainSpec
    relations: tuple[Relation, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.relations:
            raise InvalidParameters("family needs at least one relation")
        if len(self.weights) != len(self.relations):
            raise InvalidParameters("one weight per relation required")
        arities = {rel.arity for rel in self.relations}
        if len(arities) != 1:
            raise InvalidParameters(f"all relations must share one arity, got {sorted(arities)}")
        if any(rel.domain_size != self.domain.size for rel in self.relations):
            raise InvalidParameters("relation tables do not match the domain size")
        if any(w < 0 for w in self.weights):
            raise InvalidParameters("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidParameters(f"weights sum to {sum(self.weights)}, expected 1")

    @property
    def k(self) -> int:
        return self.relations[0].arity

    @property
    def q(self) -> int:
        return self.domain.size

    def weight(self, index: int) -> Fraction:
        return Fraction(self.weights[index])


@dataclass(frozen=True)
class Constraint:
    """An injective ordered scope applied to one relation of the family."""

    scope: tuple[int, ...]
    relation_index: int

    def __post_init__(self):
        if len(set(self.scope)) != len(self.scope):
            raise InvalidParameters(f"scope {self.scope} repeats a variable")


@dataclass(frozen=True)
class Instance:
    """n variables and a multiset of constraints drawn from a family.

    m_expected records the density parameter the instance was generated
    with; the realized constraint count is m.
    """

    n: int
    constraints: tuple[Constraint, ...]
    family: RelationFamily
    seed: Optional[int] = None
    m_expected: Optional[float] = None

    def __post_init__(self):
        k = self.family.k
        if self.n < k:
            raise InvalidParameters(f"need n >= k, got n={self.n}, k={k}")
        for c in self.constraints:
            if len(c.scope) != k:
                raise InvalidParameters(f"scope {c.scope} does not have arity {k}")
            if any(not 0 <= v < self.n for v in c.scope):
                raise InvalidParameters(f"scope {c.scope} leaves [0, {self.n})")
            if not 0 <= c.relation_index < len(self.family.relations):
                raise InvalidParameters(f"relation index {c.relation_index} is out of range")
        if self.m_expected is None:
            object.__setattr__(self, "m_expected", float(len(self.constraints)))
        elif self.m_expected < 0:
            raise InvalidParameters("m_expected must be nonnegative")

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def k(self) -> int:
        return self.family.k

    @property
    def q(self) -> int:
        return self.family.q

    def relation(self, constraint: Constraint) -> Relation:
        return self.family.relations[constraint.relation_index]

    def restrict_to_relation(self, relation_index: int) -> Instance:
        """Subinstance of one relation type; its expected count is m_expected * rho(r)."""
        kept = tuple(c for c in self.constraints if c.relation_index == relation_index)
        return Instance(
            n=self.n,
            constraints=kept,
            family=self.family,
            seed=self.seed,
            m_expected=self.m_expected * self.family.weights[relation_index],
        )


@dataclass(frozen=True)
class Assignment:
    values: tuple[int, ...]

    def validate(self, n: int, q: int) -> None:
        if len(self.values) != n:
            raise InvalidParameters(f"assignment has length {len(self.values)}, expected {n}")
        if any(not 0 <= a < q for a in self.values):
            raise InvalidParameters(f"assignment leaves [0, {q})")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


@dataclass(frozen=True)
class MarginalVector:
    """A point of the probability simplex over D, stored exactly."""

    probs: tuple[Fraction, ...] = field()

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise InvalidParameters("marginal vector needs at least one entry")
        if any(p < 0 for p in probs):
            raise InvalidParameters("marginal entries must be nonnegative")
        if sum(probs) != 1:
            raise InvalidParameters(f"marginal sums to {float(sum(probs))}, expected 1")

    @classmethod
    def from_floats(cls, values: Sequence[float]) -> MarginalVector:
        """Snap floats summing to 1 (within 1e-12) onto exact rationals."""
        if abs(sum(values) - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidParameters(f"marginal sums to {sum(values)}, expected 1")
        probs = [Fraction(v).limit_denominator(10 ** 12) for v in values]
        largest = max(range(len(probs)), key=lambda a: probs[a])
        probs[largest] += 1 - sum(probs)
        return cls(tuple(probs))

    @classmethod
    def uniform(cls, q: int) -> MarginalVector:
        return cls(tuple(Fraction(1, q) for _ in range(q)))

    @classmethod
    def point_mass(cls, q: int, a: int) -> MarginalVector:
        return cls(tuple(Fraction(int(b == a)) for b in range(q)))

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> MarginalVector:
        total = sum(counts)
        return cls(tuple(Fraction(c, total) for c in counts))

    @property
    def q(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    def support(self) -> tuple[int, ...]:
        return tuple(a for a, p in enumerate(self.probs) if p > 0)

    def product_probability(self, b: Sequence[int]) -> Fraction:
        prob = Fraction(1)
        for a in b:
            prob *= self.probs[a]
        return prob

    def to_list(self) -> list[float]:
        return [float(p) for p in self.probs]
