"""Norm-scaling sweeps against the predicted growth of Kikuchi norms.

Predicted shapes (natural log, constants dropped):

    even |S|:  sqrt(m / n^(|S|/2)) * ell^(|S|/4) * sqrt(ell log n)
    odd |S|:   (m / n^(|S|/2)) * ell^((|S|-1)/2) * sqrt(ell log n)
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Optional, Sequence

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Instance
from csp_refuter.csp.relations import full, single_family
from csp_refuter.csp.sampling import sample_instance
from csp_refuter.errors import InvalidParameters
from csp_refuter.kikuchi.operators import EVEN, ODD, build_kikuchi_even, build_kikuchi_odd, check_level
from csp_refuter.kikuchi.tensor import build_cross_tensor, build_deviation_tensor
from csp_refuter.spectral.norms import DENSE_EXACT, NormEstimate, auto_mode, spectral_norm

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "m", "ell", "S_size", "parity", "seed", "norm", "predicted", "ratio"]


@dataclass(frozen=True)
class BenchPoint:
    n: int
    m: float
    ell: int
    S_size: int

    @property
    def parity(self) -> str:
        return EVEN if self.S_size % 2 == 0 else ODD


@dataclass
class BenchRow:
    n: int
    m: float
    ell: int
    S_size: int
    parity: str
    seed: int
    norm: float
    predicted: float
    ratio: float
    method: str = DENSE_EXACT
    certified: bool = True

    def csv_row(self) -> dict:
        return {key: getattr(self, key) for key in CSV_COLUMNS}


def predicted_norm(n: int, m: float, ell: int, s: int) -> float:
    growth = math.sqrt(ell * math.log(n))
    if s % 2 == 0:
        return math.sqrt(m / n ** (s / 2)) * ell ** (s / 4) * growth
    return (m / n ** (s / 2)) * ell ** ((s - 1) / 2) * growth


def measure_norm(
    inst: Instance,
    s: int,
    ell: int,
    seed: int = 0,
    mode: Optional[str] = None,
    cfg: Optional[RefuterConfig] = None,
) -> NormEstimate:
    """||M_beta|| at beta = 0^s for the raw deviation tensor on S = (0, ..., s-1)."""
    use_config = cfg or config
    check_level(s, ell)
    C = build_deviation_tensor(inst, tuple(range(s)))
    beta = (0,) * s
    if C.is_zero():
        return NormEstimate(value=0.0, method=DENSE_EXACT, certified=True, raw_value=0.0)
    if s % 2 == 0:
        op = build_kikuchi_even(C, beta, ell, use_config)
    else:
        op = build_kikuchi_odd(build_cross_tensor(C, use_config), beta, ell, use_config)
    return spectral_norm(op, mode or auto_mode(op, use_config), seed=seed, cfg=use_config)


def _measure_point(point: BenchPoint, seed: int, cfg: RefuterConfig) -> BenchRow:
    family = single_family(full(2, point.S_size))
    inst = sample_instance(family, point.n, point.m, seed)
    norm = measure_norm(inst, point.S_size, point.ell, seed=seed, cfg=cfg)
    predicted = predicted_norm(point.n, point.m, point.ell, point.S_size)
    value = norm.raw_value if norm.raw_value is not None else norm.value
    return BenchRow(
        n=point.n,
        m=point.m,
        ell=point.ell,
        S_size=point.S_size,
        parity=point.parity,
        seed=seed,
        norm=value,
        predicted=predicted,
        ratio=value / predicted if predicted else 0.0,
        method=norm.method,
        certified=norm.certified,
    )


def bench_norm_scaling(
    points: Iterable[BenchPoint],
    seeds: Sequence[int] = tuple(range(10)),
    cfg: Optional[RefuterConfig] = None,
) -> list[BenchRow]:
    """Measure ||M|| for every (point, seed) on instances of the full relation of arity |S|.

    Dense-exact norms are used up to the dense cap, power iteration above it.
    Rows come back in (point, seed) order.
    """
    use_config = cfg or config
    points = list(points)
    if any(p.S_size < 2 for p in points):
        raise InvalidParameters("benchmark points need |S| >= 2")
    jobs = [(p, s) for p in points for s in seeds]
    with ThreadPoolExecutor(max_workers=use_config.threads) as pool:
        rows = list(pool.map(lambda job: _measure_point(job[0], job[1], use_config), jobs))
    logger.info("measured %d norms over %d points", len(rows), len(points))
    return rows


def median_table(rows: Iterable[BenchRow]) -> list[dict]:
    """Per-point medians of norm and ratio, in first-seen point order."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.n, row.m, row.ell, row.S_size, row.parity), []).append(row)
    table = []
    for (n, m, ell, s, parity), group in groups.items():
        table.append({
            "n": n,
            "m": m,
            "ell": ell,
            "S_size": s,
            "parity": parity,
            "seeds": len(group),
            "median_norm": statistics.median(r.norm for r in group),
            "predicted": group[0].predicted,
            "median_ratio": statistics.median(r.ratio for r in group),
        })
    return table


def write_csv(rows: Iterable[BenchRow], stream: IO[str]) -> int:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    count = 0
    for row in rows:
        writer.writerow(row.csv_row())
        count += 1
    return count


def rows_to_dicts(rows: Iterable[BenchRow]) -> list[dict]:
    return [asdict(row) for row in rows]
