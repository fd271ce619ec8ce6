"""Exhaustive ground truth, written without the main path's indexing helpers.

Every routine enumerates assignments with itertools.product and works in
Fractions, refusing inputs above the oracle cap instead of degrading.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Instance
from csp_refuter.errors import InvalidParameters, ResourceLimit, UndefinedValue

logger = logging.getLogger(__name__)


def check_states(q: int, n: int, cfg: Optional[RefuterConfig] = None, component: str = "oracle") -> None:
    use_config = cfg or config
    if q ** n > use_config.oracle_cap:
        raise ResourceLimit(component, q ** n, use_config.oracle_cap)


def all_assignments(n: int, q: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(q), repeat=n)


def _satisfied(inst: Instance, x: Sequence[int]) -> int:
    total = 0
    for c in inst.constraints:
        local = [x[v] for v in c.scope]
        code = 0
        for a in local:
            code = code * inst.q + a
        total += inst.family.relations[c.relation_index].membership[code]
    return total


def exhaustive_opt(inst: Instance, cfg: Optional[RefuterConfig] = None) -> tuple[Fraction, tuple[int, ...]]:
    """max_x Val(x) by plain enumeration; ties go to the first (smallest) assignment."""
    if inst.m == 0:
        raise UndefinedValue("value of an instance without constraints is undefined")
    check_states(inst.q, inst.n, cfg, "exhaustive_opt")
    best, witness = -1, None
    for x in all_assignments(inst.n, inst.q):
        count = _satisfied(inst, x)
        if count > best:
            best, witness = count, x
    return Fraction(best, inst.m), witness


def _subinstance(inst: Instance, rel_index: Optional[int]) -> tuple[list, Fraction, int]:
    """(constraints, expected count, realized count) of one relation's subinstance."""
    if rel_index is None:
        return list(inst.constraints), Fraction(inst.m_expected), inst.m
    kept = [c for c in inst.constraints if c.relation_index == rel_index]
    return kept, Fraction(inst.m_expected) * Fraction(inst.family.weights[rel_index]), len(kept)


def _ordered_tuples(n: int, s: int) -> int:
    total = 1
    for i in range(s):
        total *= n - i
    return total


def deviation_value(
    inst: Instance,
    S: Sequence[int],
    beta: Sequence[int],
    x: Sequence[int],
    rel_index: Optional[int] = None,
) -> Fraction:
    """C_{S,beta}(x) from its definition, raw (not divided by m)."""
    constraints, m_expected, _ = _subinstance(inst, rel_index)
    n, k, s = inst.n, inst.k, len(S)
    beta = tuple(beta)
    hits = sum(1 for c in constraints if tuple(x[c.scope[i]] for i in S) == beta)
    per_tuple = m_expected / _ordered_tuples(n, k)
    fan_out = _ordered_tuples(n - s, k - s)
    matching = sum(
        1 for gamma in itertools.permutations(range(n), s)
        if all(x[v] == a for v, a in zip(gamma, beta))
    )
    return hits - per_tuple * fan_out * matching


def brute_deviation_max(
    inst: Instance,
    S: Sequence[int],
    beta: Sequence[int],
    rel_index: Optional[int] = None,
    normalized: bool = True,
    cfg: Optional[RefuterConfig] = None,
) -> Fraction:
    """max_x |C_{S,beta}(x)| over all q^n assignments, divided by the realized m when normalized."""
    S = tuple(S)
    if not S or len(S) != len(beta) or len(S) > inst.k:
        raise InvalidParameters(f"S={S} and beta={tuple(beta)} do not match")
    check_states(inst.q, inst.n, cfg, "brute_deviation_max")
    constraints, m_expected, m = _subinstance(inst, rel_index)
    if normalized and m == 0:
        raise UndefinedValue("normalized deviation of an empty subinstance is undefined")

    n, k, s = inst.n, inst.k, len(S)
    beta = tuple(beta)
    restricted = Counter(tuple(c.scope[i] for i in S) for c in constraints)
    background = m_expected / _ordered_tuples(n, k) * _ordered_tuples(n - s, k - s)
    matches_by_counts: dict = {}

    best = Fraction(0)
    for x in all_assignments(n, inst.q):
        hits = sum(mult for gamma, mult in restricted.items() if all(x[v] == a for v, a in zip(gamma, beta)))
        profile = tuple(sorted(Counter(x).items()))
        if profile not in matches_by_counts:
            matches_by_counts[profile] = sum(
                1 for gamma in itertools.permutations(range(n), s)
                if all(x[v] == a for v, a in zip(gamma, beta))
            )
        value = abs(hits - background * matches_by_counts[profile])
        best = max(best, value)
    return best / m if normalized else best
