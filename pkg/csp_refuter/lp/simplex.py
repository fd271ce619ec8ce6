"""Dense two-phase tableau simplex with Bland's rule.

The same code runs over ``fractions.Fraction`` (exact) or ``float`` (with a
pivot tolerance). Problems are given in standard form

    minimize c.x  subject to  A x = b,  x >= 0

and the result carries the basic primal solution together with the basic
dual solution y = c_B B^-1 read off the artificial columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from csp_refuter.errors import NonConverged

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    value: Number | None = None
    x: list[Number] = field(default_factory=list)
    duals: list[Number] = field(default_factory=list)
    basis: list[int] = field(default_factory=list)
    pivots: int = 0


class SimplexTableau:
    """Full tableau over structural columns followed by one artificial per row."""

    def __init__(self, A: Sequence[Sequence], b: Sequence, exact: bool = True, tolerance: float = 1e-10):
        self.exact = exact
        self.epsilon = 0 if exact else tolerance
        self.zero = Fraction(0) if exact else 0.0
        self.m = len(A)
        self.n = len(A[0]) if self.m else 0
        convert = Fraction if exact else float

        self.flipped = []
        self.rows = []
        self.rhs = []
        for i, (row, rhs) in enumerate(zip(A, b)):
            sign = -1 if rhs < 0 else 1
            self.flipped.append(sign < 0)
            values = [convert(v) * sign for v in row]
            artificial = [self.zero] * self.m
            artificial[i] = convert(1)
            self.rows.append(values + artificial)
            self.rhs.append(convert(rhs) * sign)
        self.width = self.n + self.m
        self.basis = [self.n + i for i in range(self.m)]
        self.reduced = [self.zero] * self.width
        self.objective = self.zero
        self.pivots = 0

    def _is_positive(self, v) -> bool:
        return v > self.epsilon

    def _is_negative(self, v) -> bool:
        return v < -self.epsilon

    def _is_nonzero(self, v) -> bool:
        return abs(v) > self.epsilon

    def pivot(self, i: int, j: int) -> None:
        row = self.rows[i]
        piv = row[j]
        nonzero = [l for l in range(self.width) if row[l] != 0]
        for l in nonzero:
            row[l] = row[l] / piv
        self.rhs[i] = self.rhs[i] / piv
        for r in range(self.m):
            if r == i:
                continue
            other = self.rows[r]
            f = other[j]
            if f == 0:
                continue
            for l in nonzero:
                other[l] = other[l] - f * row[l]
            other[j] = self.zero
            self.rhs[r] = self.rhs[r] - f * self.rhs[i]
        d = self.reduced[j]
        if d != 0:
            for l in nonzero:
                self.reduced[l] = self.reduced[l] - d * row[l]
            self.reduced[j] = self.zero
            self.objective = self.objective + d * self.rhs[i]
        self.basis[i] = j
        self.pivots += 1

    def set_costs(self, costs: Sequence) -> None:
        """Reduced costs and objective value for the current basis."""
        self.reduced = list(costs)
        self.objective = self.zero
        for i, col in enumerate(self.basis):
            cb = costs[col]
            if cb == 0:
                continue
            row = self.rows[i]
            for l in range(self.width):
                if row[l] != 0:
                    self.reduced[l] = self.reduced[l] - cb * row[l]
            self.objective = self.objective + cb * self.rhs[i]

    def bland_step(self, allowed: int) -> str:
        """One pivot on columns < allowed; returns 'optimal', 'unbounded' or 'go_on'."""
        entering = next((j for j in range(allowed) if self._is_negative(self.reduced[j])), None)
        if entering is None:
            return OPTIMAL
        best = None
        for i in range(self.m):
            a = self.rows[i][entering]
            if self._is_positive(a):
                key = (self.rhs[i] / a, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED
        self.pivot(best[1], entering)
        return "go_on"

    def run(self, allowed: int, max_pivots: int) -> str:
        while True:
            status = self.bland_step(allowed)
            if status != "go_on":
                return status
            if self.pivots > max_pivots:
                raise NonConverged(f"simplex exceeded {max_pivots} pivots", float(self.objective))

    def first_phase(self, max_pivots: int) -> bool:
        costs = [self.zero] * self.n + [self.zero + 1] * self.m
        self.set_costs(costs)
        self.run(self.width, max_pivots)
        return not self._is_positive(self.objective)

    def pivot_out_artificials(self) -> None:
        for i in range(self.m):
            if self.basis[i] < self.n:
                continue
            row = self.rows[i]
            j = next((j for j in range(self.n) if self._is_nonzero(row[j])), None)
            if j is not None:
                self.pivot(i, j)

    def primal_solution(self) -> list:
        x = [self.zero] * self.n
        for i, col in enumerate(self.basis):
            if col < self.n:
                x[col] = self.rhs[i]
        return x

    def dual_solution(self) -> list:
        duals = []
        for i in range(self.m):
            y = -self.reduced[self.n + i]
            duals.append(-y if self.flipped[i] else y)
        return duals


def solve_standard_form(
    c: Sequence,
    A: Sequence[Sequence],
    b: Sequence,
    exact: bool = True,
    tolerance: float = 1e-10,
    max_pivots: int | None = None,
) -> LPResult:
    """Minimize c.x subject to A x = b, x >= 0.

    Returns:
        LPResult: status, optimal value, basic solution x, basic duals y.
    """
    tableau = SimplexTableau(A, b, exact=exact, tolerance=tolerance)
    limit = max_pivots or 50 * (tableau.m + tableau.width) + 1000
    if not tableau.first_phase(limit):
        return LPResult(status=INFEASIBLE, pivots=tableau.pivots)
    tableau.pivot_out_artificials()

    convert = Fraction if exact else float
    costs = [convert(v) for v in c] + [tableau.zero] * tableau.m
    tableau.set_costs(costs)
    status = tableau.run(tableau.n, limit)
    if status == UNBOUNDED:
        return LPResult(status=UNBOUNDED, pivots=tableau.pivots)

    logger.debug("simplex %dx%d solved in %d pivots", tableau.m, tableau.n, tableau.pivots)
    return LPResult(
        status=OPTIMAL,
        value=tableau.objective,
        x=tableau.primal_solution(),
        duals=tableau.dual_solution(),
        basis=list(tableau.basis),
        pivots=tableau.pivots,
    )
