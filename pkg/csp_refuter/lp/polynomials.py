"""Distributions over D^k and low-degree polynomials in the indicator basis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from csp_refuter.csp.domain import MarginalVector, Relation, assignments, tuple_index
from csp_refuter.errors import InvalidParameters

Number = Union[Fraction, float]
Key = tuple[tuple[int, ...], tuple[int, ...]]

CONSTANT: Key = ((), ())
MASS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DistributionTable:
    """A probability table over D^k in row-major order."""

    arity: int
    domain_size: int
    probs: tuple

    def __post_init__(self):
        if len(self.probs) != self.domain_size ** self.arity:
            raise InvalidParameters(
                f"table has {len(self.probs)} entries, expected {self.domain_size ** self.arity}"
            )
        exact = all(isinstance(p, (int, Fraction)) for p in self.probs)
        slack = 0 if exact else MASS_TOLERANCE
        if any(p < -slack for p in self.probs):
            raise InvalidParameters("distribution entries must be nonnegative")
        if abs(sum(self.probs) - 1) > slack:
            raise InvalidParameters(f"distribution has mass {float(sum(self.probs))}, expected 1")

    @classmethod
    def product(cls, nu: MarginalVector, k: int) -> DistributionTable:
        return cls(k, nu.q, tuple(nu.product_probability(x) for x in assignments(nu.q, k)))

    def __getitem__(self, x: Sequence[int]):
        return self.probs[tuple_index(x, self.domain_size)]

    def support(self) -> list[tuple[int, ...]]:
        return [x for x, p in zip(assignments(self.domain_size, self.arity), self.probs) if p > 0]

    def marginal(self, W: Sequence[int]) -> dict[tuple[int, ...], Number]:
        """Distribution of x_W as a map from local assignments to mass."""
        out: dict[tuple[int, ...], Number] = {b: 0 for b in assignments(self.domain_size, len(W))}
        for x, p in zip(assignments(self.domain_size, self.arity), self.probs):
            if p:
                b = tuple(x[i] for i in W)
                out[b] = out[b] + p
        return out

    def is_t_wise_independent(self, nu: MarginalVector, t: int, tol: float = 0.0) -> bool:
        """True when every size-t marginal equals the product nu^t."""
        for W in itertools.combinations(range(self.arity), t):
            for b, mass in self.marginal(W).items():
                if abs(mass - nu.product_probability(b)) > tol:
                    return False
        return True

    def supported_in(self, rel: Relation) -> bool:
        return all(rel.contains(x) for x in self.support())


@dataclass(frozen=True, eq=False)
class IndicatorPolynomial:
    """f(x) = sum over (W, b) of c_W(b) * 1[x_W = b], W a sorted subset of [k].

    The constant term is stored under the key ((), ()).
    """

    arity: int
    domain_size: int
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        for (W, b), _ in self.coefficients.items():
            if len(W) != len(b) or list(W) != sorted(set(W)) or any(not 0 <= i < self.arity for i in W):
                raise InvalidParameters(f"bad monomial key {(W, b)}")
            if any(not 0 <= a < self.domain_size for a in b):
                raise InvalidParameters(f"local assignment {b} leaves the domain")

    @property
    def degree(self) -> int:
        return max((len(W) for W, _ in self.coefficients), default=0)

    def subsets(self) -> list[tuple[int, ...]]:
        return sorted({W for W, _ in self.coefficients}, key=lambda W: (len(W), W))

    def coefficients_on(self, W: tuple[int, ...]) -> dict[tuple[int, ...], Number]:
        return {b: c for (V, b), c in self.coefficients.items() if V == W}

    def evaluate(self, x: Sequence[int]):
        total = 0
        for (W, b), c in self.coefficients.items():
            if all(x[i] == a for i, a in zip(W, b)):
                total = total + c
        return total

    def values(self) -> list:
        """f over all of D^k in row-major order."""
        return [self.evaluate(x) for x in assignments(self.domain_size, self.arity)]

    def expectation(self, nu: MarginalVector):
        """E_{x ~ nu^k} f(x); probabilities stay exact for Fraction coefficients."""
        total = 0
        for (_, b), c in self.coefficients.items():
            weight = nu.product_probability(b)
            total = total + (c * weight if isinstance(c, Fraction) else c * float(weight))
        return total

    def l1_norm(self):
        return sum((abs(c) for c in self.coefficients.values()), 0)

    def dominates(self, rel: Relation, tol: float = 0.0) -> bool:
        """Pointwise f(x) >= P(x) for every x in D^k."""
        return all(v >= p - tol for v, p in zip(self.values(), rel.predicate_vector()))


@dataclass(frozen=True, eq=False)
class DominatingPolynomial(IndicatorPolynomial):
    """Dual solution Q_nu: a degree-t polynomial dominating a predicate.

    basis records how it was computed ("indicator" or "monomial"); for the
    monomial path character_coefficients keeps the +-1 character form.
    """

    t: int = 1
    marginal: Optional[MarginalVector] = None
    basis: str = "indicator"
    character_coefficients: dict = field(default_factory=dict)

    def val_t(self):
        return val_t(self)


def val_t(Q: DominatingPolynomial):
    """Dual objective sum_{W,b} c_W(b) * prod_i nu(b_i)."""
    if Q.marginal is None:
        raise InvalidParameters("dominating polynomial carries no marginal")
    return Q.expectation(Q.marginal)
