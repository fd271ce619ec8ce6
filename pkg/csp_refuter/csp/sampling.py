"""Random instance generation.

Streams: every random draw comes from a Philox (counter-based) generator
seeded by ``SeedSequence(seed, spawn_key=...)``. Spawn key ``(0,)`` drives
the subset inclusion counts; spawn key ``(1, j)`` drives the bijection and
relation of constraint number j. Constraint j is therefore reproducible on
its own, independent of how generation is split across workers.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from csp_refuter.csp.domain import Constraint, Instance, RelationFamily
from csp_refuter.errors import InvalidParameters

logger = logging.getLogger(__name__)

INCLUSION_STREAM = 0
CONSTRAINT_STREAM = 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for the given spawn key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def unrank_subset(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The rank-th k-subset of range(n) in lexicographic order."""
    out = []
    x = 0
    for remaining in range(k, 0, -1):
        while math.comb(n - x - 1, remaining - 1) <= rank:
            rank -= math.comb(n - x - 1, remaining - 1)
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def ordered_density(n: int, k: int, m_expected: float) -> float:
    """p_ord = m_expected / n^(k falling): expected count per ordered distinct k-tuple."""
    return m_expected / math.perm(n, k)


def inclusion_trials(n: int, k: int, m_expected: float) -> tuple[int, float]:
    """Trials per k-subset and per-trial probability; one Bernoulli(p) trial while p <= 1."""
    p = m_expected / math.comb(n, k)
    trials = max(1, math.ceil(p))
    return trials, p / trials


def sample_instance(family: RelationFamily, n: int, m_expected: float, seed: int) -> Instance:
    """Sample a random instance: each k-subset included independently, then oriented and labelled.

    Args:
        family: Relations and their sampling weights rho.
        n: Number of variables.
        m_expected: Expected number of constraints.
        seed: Root seed of every random stream.

    Returns:
        Instance: Constraints in order of (subset rank, trial).
    """
    k = family.k
    if n < k:
        raise InvalidParameters(f"need n >= k, got n={n}, k={k}")
    if m_expected < 0:
        raise InvalidParameters(f"m_expected must be nonnegative, got {m_expected}")

    total = math.comb(n, k)
    trials, p_trial = inclusion_trials(n, k, m_expected)
    counts = stream(seed, INCLUSION_STREAM).binomial(trials, min(p_trial, 1.0), size=total)

    weights = np.asarray(family.weights, dtype=float)
    constraints = []
    for rank in np.flatnonzero(counts):
        subset = unrank_subset(int(rank), n, k)
        for _ in range(int(counts[rank])):
            rng = stream(seed, CONSTRAINT_STREAM, len(constraints))
            order = rng.permutation(k)
            relation_index = int(rng.choice(len(weights), p=weights))
            constraints.append(Constraint(tuple(subset[i] for i in order), relation_index))

    logger.debug("sampled n=%d m=%d (expected %.3f, seed %d)", n, len(constraints), m_expected, seed)
    return Instance(n=n, constraints=tuple(constraints), family=family, seed=seed, m_expected=float(m_expected))
