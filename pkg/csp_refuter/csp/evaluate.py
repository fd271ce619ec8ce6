"""Instance values, exhaustive optima and marginal statistics."""

from __future__ import annotations

import logging
from collections import Counter
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Assignment, Instance, MarginalVector
from csp_refuter.errors import ResourceLimit, UndefinedValue

logger = logging.getLogger(__name__)

CHUNK = 1 << 16


def satisfied_count(inst: Instance, x: Assignment) -> int:
    x.validate(inst.n, inst.q)
    return sum(
        1 for c in inst.constraints
        if inst.relation(c).contains(tuple(x.values[v] for v in c.scope))
    )


def eval_value(inst: Instance, x: Assignment) -> Fraction:
    """Fraction of constraints whose scope restriction of x lies in the relation."""
    if inst.m == 0:
        raise UndefinedValue("value of an instance without constraints is undefined")
    return Fraction(satisfied_count(inst, x), inst.m)


def _grouped_constraints(inst: Instance) -> list[tuple[tuple[int, ...], int, int]]:
    grouped = Counter((c.scope, c.relation_index) for c in inst.constraints)
    return [(scope, rel, mult) for (scope, rel), mult in sorted(grouped.items())]


def _digits(indices: np.ndarray, n: int, q: int) -> np.ndarray:
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % q


def satisfied_counts(inst: Instance, xs: np.ndarray) -> np.ndarray:
    """Satisfied-constraint counts for a batch of assignments (rows of xs)."""
    k, q = inst.k, inst.q
    place = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    totals = np.zeros(xs.shape[0], dtype=np.int64)
    for scope, rel, mult in _grouped_constraints(inst):
        codes = xs[:, list(scope)] @ place
        totals += mult * inst.family.relations[rel].table[codes]
    return totals


def brute_opt(inst: Instance, cfg: Optional[RefuterConfig] = None) -> tuple[Fraction, Assignment]:
    """Exhaustive maximum of the instance value.

    Assignments are scanned in lexicographic order and the first maximizer
    is kept, so ties go to the lexicographically smallest assignment.

    Returns:
        tuple: (value, witness assignment).
    """
    use_config = cfg or config
    if inst.m == 0:
        raise UndefinedValue("value of an instance without constraints is undefined")
    n, q = inst.n, inst.q
    states = q ** n
    if states > use_config.cap_states:
        raise ResourceLimit("brute_opt", states, use_config.cap_states)

    best_count, best_index = -1, 0
    for start in range(0, states, CHUNK):
        indices = np.arange(start, min(states, start + CHUNK), dtype=np.int64)
        counts = satisfied_counts(inst, _digits(indices, n, q))
        local = int(np.argmax(counts))
        if counts[local] > best_count:
            best_count, best_index = int(counts[local]), start + local

    witness = tuple(int(a) for a in _digits(np.array([best_index], dtype=np.int64), n, q)[0])
    logger.debug("brute_opt over %d assignments: %d/%d", states, best_count, inst.m)
    return Fraction(best_count, inst.m), Assignment(witness)


def count_vector(x: Assignment | Sequence[int], q: int) -> tuple[int, ...]:
    values = x.values if isinstance(x, Assignment) else tuple(x)
    counts = [0] * q
    for a in values:
        counts[a] += 1
    return tuple(counts)


def marginal_vector(x: Assignment, q: int) -> MarginalVector:
    """Normalized frequency of every domain value in x."""
    return MarginalVector.from_counts(count_vector(x, q))


def empirical_relation_distribution(inst: Instance) -> tuple[Fraction, ...]:
    """Fraction of constraints carrying each relation of the family."""
    if inst.m == 0:
        raise UndefinedValue("empirical distribution of an empty instance is undefined")
    counts = Counter(c.relation_index for c in inst.constraints)
    return tuple(Fraction(counts.get(r, 0), inst.m) for r in range(len(inst.family.relations)))
