"""Spectral norms of symmetric operators: dense-exact or power iteration."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from csp_refuter.config import RefuterConfig, config
from csp_refuter.errors import InvalidParameters, ResourceLimit
from csp_refuter.kikuchi.operators import KikuchiOperator

logger = logging.getLogger(__name__)

EXACT = "exact"
ESTIMATE = "estimate"
DENSE_EXACT = "dense-exact"
ITERATIVE = "iterative"
STABLE_ITERATIONS = 10

OperatorLike = Union[KikuchiOperator, np.ndarray, sp.sparray, sp.spmatrix]


@dataclass
class NormEstimate:
    value: float
    method: str
    iterations: int = 0
    residual: float = 0.0
    certified: bool = False
    converged: bool = True
    raw_value: Optional[float] = None
    dim: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _matrix(op: OperatorLike):
    if isinstance(op, KikuchiOperator):
        return op.matrix
    if sp.issparse(op):
        return op.tocsr()
    return np.asarray(op, dtype=float)


def _nonzero_count(M) -> int:
    return int(M.count_nonzero()) if sp.issparse(M) else int(np.count_nonzero(M))


def dense_norm(M: np.ndarray, cfg: RefuterConfig) -> NormEstimate:
    """Largest |eigenvalue| from two independent symmetric eigensolvers."""
    dim = M.shape[0]
    first = float(np.max(np.abs(np.linalg.eigvalsh(M))))
    second = float(np.max(np.abs(scipy.linalg.eigvalsh(M))))
    disagreement = abs(first - second)
    agree = disagreement <= cfg.eig_agreement * max(1.0, first)
    if not agree:
        logger.warning("eigensolvers disagree: %.17g vs %.17g", first, second)
    raw = max(first, second)
    # backward-error guard for the symmetric eigensolve
    guard = 4 * dim * np.finfo(float).eps * float(np.linalg.norm(M))
    return NormEstimate(
        value=raw + guard,
        method=DENSE_EXACT,
        residual=disagreement,
        certified=agree,
        raw_value=raw,
        dim=dim,
    )


def power_norm(M, tol: float, safety: float, seed: int = 0, max_iter: Optional[int] = None) -> NormEstimate:
    """Power iteration on M^2 from a seeded Gaussian start.

    Stops once the relative change of the estimate stays below tol for
    STABLE_ITERATIONS consecutive steps. The returned value is inflated by
    the safety factor and never certified.
    """
    dim = M.shape[0]
    if max_iter is None:
        max_iter = max(100, int(10 * dim * math.log(max(dim, 2))))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)

    estimate = 0.0
    stable = 0
    residual = 0.0
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        y = M @ (M @ x)
        y_norm = float(np.linalg.norm(y))
        if y_norm == 0.0:
            estimate, converged, residual = 0.0, True, 0.0
            break
        current = math.sqrt(y_norm)
        change = abs(current - estimate) / current
        estimate = current
        residual = float(np.linalg.norm(y - float(x @ y) * x))
        x = y / y_norm
        stable = stable + 1 if change < tol else 0
        if stable >= STABLE_ITERATIONS:
            converged = True
            break

    if not converged:
        logger.warning("power iteration stopped after %d iterations (estimate %.6g)", iterations, estimate)
    return NormEstimate(
        value=estimate * safety,
        method=ITERATIVE,
        iterations=iterations,
        residual=residual,
        certified=False,
        converged=converged,
        raw_value=estimate,
        dim=dim,
    )


def spectral_norm(
    op: OperatorLike,
    mode: str = EXACT,
    tol: Optional[float] = None,
    seed: int = 0,
    cfg: Optional[RefuterConfig] = None,
) -> NormEstimate:
    """Spectral norm of a symmetric operator.

    Args:
        op: Kikuchi operator, dense array or sparse matrix.
        mode: "exact" (dense eigensolve, certified) or "estimate" (power iteration).
        tol: Relative tolerance of the power iteration.
        seed: Seed of the random start vector.

    Raises:
        ResourceLimit: exact mode above the dense cap.
    """
    use_config = cfg or config
    M = _matrix(op)
    dim = M.shape[0]
    if mode not in (EXACT, ESTIMATE):
        raise InvalidParameters(f"Unknown norm mode: {mode}")

    if mode == EXACT:
        if dim > use_config.dense_cap:
            raise ResourceLimit("spectral_norm", dim, use_config.dense_cap)
        if dim == 0 or _nonzero_count(M) == 0:
            return NormEstimate(value=0.0, method=DENSE_EXACT, certified=True, raw_value=0.0, dim=dim)
        dense = M.toarray() if sp.issparse(M) else M
        return dense_norm(dense, use_config)

    if dim == 0 or _nonzero_count(M) == 0:
        return NormEstimate(value=0.0, method=ITERATIVE, certified=False, raw_value=0.0, dim=dim)
    return power_norm(M, tol or use_config.power_tolerance, use_config.power_safety, seed)


def auto_mode(op: OperatorLike, cfg: Optional[RefuterConfig] = None) -> str:
    """Exact when the operator fits under the dense cap."""
    use_config = cfg or config
    return EXACT if _matrix(op).shape[0] <= use_config.dense_cap else ESTIMATE
