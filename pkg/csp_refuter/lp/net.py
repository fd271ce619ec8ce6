"""Grids over the probability simplex of marginal vectors."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import MarginalVector
from csp_refuter.errors import InvalidParameters, ResourceLimit


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer vectors of the given length summing to total, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def grid_size(step: float) -> int:
    """Smallest N with 1/N <= step (a step of 1/N itself maps to N)."""
    if step <= 0:
        raise InvalidParameters(f"net step must be positive, got {step}")
    ratio = 1.0 / step
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) < 1e-9:
        return nearest
    return max(1, math.ceil(ratio))


def net_point_count(q: int, N: int) -> int:
    return math.comb(N + q - 1, q - 1)


def grid_points(q: int, N: int) -> list[MarginalVector]:
    return [MarginalVector(tuple(Fraction(c, N) for c in counts)) for counts in compositions(N, q)]


def marginal_net(
    q: int,
    delta_net: float,
    n: Optional[int] = None,
    cfg: Optional[RefuterConfig] = None,
) -> list[MarginalVector]:
    """Simplex grid of step delta_net (vertices included), sorted lexicographically.

    When n is given, every realizable empirical marginal (count vector of an
    assignment to n variables, divided by n) is added as well.
    """
    use_config = cfg or config
    if q < 1:
        raise InvalidParameters(f"domain size must be >= 1, got {q}")
    N = grid_size(delta_net)
    count = net_point_count(q, N) + (net_point_count(q, n) if n else 0)
    if count > use_config.net_cap:
        raise ResourceLimit("marginal_net", count, use_config.net_cap)

    points = {nu.probs: nu for nu in grid_points(q, N)}
    if n:
        for nu in grid_points(q, n):
            points.setdefault(nu.probs, nu)
    return [points[key] for key in sorted(points)]
