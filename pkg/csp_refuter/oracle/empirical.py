"""Empirical convergence of opt(I) towards opt_t(rho) on growing random instances."""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import RelationFamily
from csp_refuter.csp.evaluate import brute_opt
from csp_refuter.csp.sampling import sample_instance
from csp_refuter.lp.twise import opt_t

logger = logging.getLogger(__name__)


@dataclass
class GapRow:
    n: int
    m_expected: float
    values: list = field(default_factory=list)
    gaps: list = field(default_factory=list)

    @property
    def median_gap(self) -> float:
        return statistics.median(self.gaps) if self.gaps else 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m_expected": self.m_expected,
            "values": self.values,
            "gaps": self.gaps,
            "median_gap": self.median_gap,
        }


@dataclass
class EmpiricalOptReport:
    reference: float
    t: int
    rows: list = field(default_factory=list)

    @property
    def medians(self) -> list[float]:
        return [row.median_gap for row in self.rows]

    @property
    def shrinking(self) -> bool:
        medians = self.medians
        return len(medians) < 2 or medians[-1] <= medians[0]

    def to_dict(self) -> dict:
        return {
            "reference_opt_t": self.reference,
            "t": self.t,
            "rows": [row.to_dict() for row in self.rows],
            "shrinking": self.shrinking,
        }


def empirical_opt_check(
    family: RelationFamily,
    t: int,
    n_list: Sequence[int],
    m_rule: Callable[[int], float],
    seeds: Sequence[int] = tuple(range(5)),
    epsilon: float = 0.01,
    cfg: Optional[RefuterConfig] = None,
) -> EmpiricalOptReport:
    """|opt(I) - opt_t(rho)| for instances with m_expected = m_rule(n), per n and seed."""
    use_config = cfg or config
    reference = float(opt_t(family, t, epsilon, cfg=use_config).value)
    report = EmpiricalOptReport(reference=reference, t=t)
    for n in n_list:
        row = GapRow(n=n, m_expected=float(m_rule(n)))
        for seed in seeds:
            inst = sample_instance(family, n, row.m_expected, seed)
            if inst.m == 0:
                continue
            value = float(brute_opt(inst, use_config)[0])
            row.values.append(value)
            row.gaps.append(abs(value - reference))
        logger.debug("n=%d median gap %.4f", n, row.median_gap)
        report.rows.append(row)
    return report
