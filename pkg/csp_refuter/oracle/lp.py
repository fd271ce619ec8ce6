"""Fixed-marginal primal LP by vertex enumeration in rational arithmetic."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional

from csp_refuter.csp.domain import MarginalVector, Relation
from csp_refuter.errors import InvalidParameters, ResourceLimit

DEFAULT_BASIS_CAP = 200_000


def _reduce(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Row-reduced echelon form with zero rows dropped."""
    rows = [list(r) for r in rows]
    width = len(rows[0]) - 1 if rows else 0
    pivot_row = 0
    for col in range(width):
        pick = next((i for i in range(pivot_row, len(rows)) if rows[i][col] != 0), None)
        if pick is None:
            continue
        rows[pivot_row], rows[pick] = rows[pick], rows[pivot_row]
        lead = rows[pivot_row][col]
        rows[pivot_row] = [v / lead for v in rows[pivot_row]]
        for i in range(len(rows)):
            if i != pivot_row and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[pivot_row])]
        pivot_row += 1
    return [r for r in rows if any(v != 0 for v in r)]


def _solve_square(A: list[list[Fraction]], b: list[Fraction]) -> Optional[list[Fraction]]:
    """Unique solution of a square system, or None when singular."""
    size = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(size)]
    for col in range(size):
        pick = next((i for i in range(col, size) if aug[i][col] != 0), None)
        if pick is None:
            return None
        aug[col], aug[pick] = aug[pick], aug[col]
        lead = aug[col][col]
        aug[col] = [v / lead for v in aug[col]]
        for i in range(size):
            if i != col and aug[i][col] != 0:
                factor = aug[i][col]
                aug[i] = [a - factor * c for a, c in zip(aug[i], aug[col])]
    return [aug[i][size] for i in range(size)]


def _points(q: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(q), repeat=k))


def primal_constraints(rel: Relation, nu: MarginalVector, t: int) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Equality rows: total mass 1 and every |W| = t marginal equal to nu^t."""
    q, k = rel.domain_size, rel.arity
    points = _points(q, k)
    A = [[Fraction(1)] * len(points)]
    b = [Fraction(1)]
    for W in itertools.combinations(range(k), t):
        for local in itertools.product(range(q), repeat=t):
            A.append([Fraction(int(all(x[i] == a for i, a in zip(W, local)))) for x in points])
            weight = Fraction(1)
            for a in local:
                weight *= nu.probs[a]
            b.append(weight)
    return A, b


def vertex_lp_optimum(
    rel: Relation,
    nu: MarginalVector,
    t: int,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> tuple[Fraction, tuple[Fraction, ...]]:
    """max_mu sum_x P(x) mu(x) over the t-wise nu-independent polytope, by trying every basis.

    Returns:
        tuple: (optimum, an optimal vertex as a probability table over D^k).
    """
    if not 1 <= t <= rel.arity:
        raise InvalidParameters(f"need 1 <= t <= k, got t={t}")
    A, b = primal_constraints(rel, nu, t)
    reduced = _reduce([row + [rhs] for row, rhs in zip(A, b)])
    if any(all(v == 0 for v in row[:-1]) for row in reduced):
        raise InvalidParameters("marginal constraints are inconsistent")
    rank = len(reduced)
    columns = len(A[0])
    bases = math.comb(columns, rank)
    if bases > basis_cap:
        raise ResourceLimit("vertex_lp_optimum", bases, basis_cap)

    A_red = [row[:-1] for row in reduced]
    b_red = [row[-1] for row in reduced]
    payoff = [Fraction(int(v)) for v in rel.membership]
    best_value, best_vertex = None, None
    for basis in itertools.combinations(range(columns), rank):
        solution = _solve_square([[row[j] for j in basis] for row in A_red], b_red)
        if solution is None or any(v < 0 for v in solution):
            continue
        value = sum((payoff[j] * v for j, v in zip(basis, solution)), Fraction(0))
        if best_value is None or value > best_value:
            vertex = [Fraction(0)] * columns
            for j, v in zip(basis, solution):
                vertex[j] = v
            best_value, best_vertex = value, tuple(vertex)
    return best_value, best_vertex

