"""Deviation tensors and the cross tensor of the Cauchy-Schwarz step.

For S a set of scope positions with s = |S|, the raw deviation tensor is

    C_S[gamma] = #{constraints whose scope restricted to S is gamma}
                 - p_ord * (n - s)^(k - s falling)

on injective s-tuples gamma (zero elsewhere). It is stored as an integer
count dictionary plus the scalar background b = p_ord * (n - s)^(k - s falling),
so entries stay exact rationals and nothing dense is built unless asked for.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Assignment, Instance
from csp_refuter.errors import InvalidParameters, ResourceLimit, WrongMode

logger = logging.getLogger(__name__)


def injective_count(x: Sequence[int], beta: Sequence[int]) -> int:
    """#{injective tuples gamma with x_gamma = beta} = prod_a N_a^(c_a falling)."""
    available = Counter(x)
    needed = Counter(beta)
    total = 1
    for a, c in needed.items():
        total *= math.perm(available.get(a, 0), c)
    return total


def injective_mask(n: int, s: int) -> np.ndarray:
    """Boolean array of shape (n,)*s marking tuples with distinct entries."""
    if s == 0:
        return np.ones((), dtype=bool)
    grids = np.indices((n,) * s).reshape(s, -1)
    mask = np.ones(grids.shape[1], dtype=bool)
    for i, j in itertools.combinations(range(s), 2):
        mask &= grids[i] != grids[j]
    return mask.reshape((n,) * s)


def _lookup(keys: np.ndarray, values: np.ndarray, flat: np.ndarray) -> np.ndarray:
    flat = np.asarray(flat, dtype=np.int64)
    if keys.size == 0:
        return np.zeros(flat.shape, dtype=np.int64)
    pos = np.clip(np.searchsorted(keys, flat), 0, keys.size - 1)
    return np.where(keys[pos] == flat, values[pos], 0)


def flat_index(tuples: np.ndarray, n: int) -> np.ndarray:
    """Row-major flat index of each row of an integer array."""
    tuples = np.asarray(tuples, dtype=np.int64)
    if tuples.ndim == 1:
        tuples = tuples[None, :]
    flat = np.zeros(tuples.shape[0], dtype=np.int64)
    for col in range(tuples.shape[1]):
        flat = flat * n + tuples[:, col]
    return flat


@dataclass(frozen=True, eq=False)
class DeviationTensor:
    """Centered count tensor of an instance restricted to scope positions S."""

    S: tuple[int, ...]
    n: int
    k: int
    counts: dict = field(default_factory=dict)
    background: Fraction = Fraction(0)
    m: int = 0
    m_expected: float = 0.0
    normalized: bool = False
    relation_index: Optional[int] = None
    q: int = 2

    @property
    def size(self) -> int:
        return len(self.S)

    @property
    def p_ord(self) -> Fraction:
        return Fraction(self.m_expected) / math.perm(self.n, self.k)

    @property
    def scale(self) -> Fraction:
        """1/m for normalized tensors, 1 for raw counts."""
        if self.normalized and self.m:
            return Fraction(1, self.m)
        return Fraction(1)

    @property
    def support_size(self) -> int:
        return math.perm(self.n, self.size)

    @cached_property
    def _sorted_keys(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.counts:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        keys = flat_index(np.array(list(self.counts.keys()), dtype=np.int64), self.n)
        values = np.array(list(self.counts.values()), dtype=np.int64)
        order = np.argsort(keys)
        return keys[order], values[order]

    def counts_at(self, flat: np.ndarray) -> np.ndarray:
        """Integer counts at flat tuple indices (vectorized lookup)."""
        return _lookup(*self._sorted_keys, flat)

    def counts_array(self, cfg: Optional[RefuterConfig] = None) -> np.ndarray:
        use_config = cfg or config
        cells = self.n ** self.size
        if cells > use_config.tensor_cap:
            raise ResourceLimit("deviation_tensor", cells, use_config.tensor_cap)
        out = np.zeros(cells, dtype=np.int64)
        keys, values = self._sorted_keys
        out[keys] = values
        return out.reshape((self.n,) * self.size)

    def entry(self, gamma: Sequence[int]) -> Fraction:
        gamma = tuple(gamma)
        if len(set(gamma)) != len(gamma):
            return Fraction(0)
        return self.scale * (self.counts.get(gamma, 0) - self.background)

    def dense(self, cfg: Optional[RefuterConfig] = None) -> np.ndarray:
        counts = self.counts_array(cfg).astype(float)
        mask = injective_mask(self.n, self.size)
        return float(self.scale) * (counts - float(self.background) * mask)

    def evaluate(self, x: Assignment | Sequence[int], beta: Sequence[int]) -> Fraction:
        """C_{S,beta}(x) = sum_gamma C_S[gamma] 1[x_gamma = beta], exactly."""
        values = x.values if isinstance(x, Assignment) else tuple(x)
        beta = tuple(beta)
        hits = sum(
            c for gamma, c in self.counts.items()
            if all(values[v] == a for v, a in zip(gamma, beta))
        )
        return self.scale * (hits - self.background * injective_count(values, beta))

    def is_zero(self) -> bool:
        if self.background == 0:
            return not any(self.counts.values())
        if len(self.counts) != self.support_size:
            return False
        return all(c == self.background for c in self.counts.values())

    def linear_bound(self) -> Fraction:
        """Exact max_x |C_{S,beta}(x)| for |S| = 1 (any beta, q >= 2).

        The set {v : x_v = beta} is free, so the maximum is the larger of the
        positive and negative entry sums.
        """
        if self.size != 1:
            raise WrongMode(f"linear bound needs |S| = 1, got {self.size}")
        positive = Fraction(0)
        negative = Fraction(0)
        for v in range(self.n):
            e = self.counts.get((v,), 0) - self.background
            if e > 0:
                positive += e
            else:
                negative -= e
        return self.scale * max(positive, negative)


def _check_positions(S: Sequence[int], k: int) -> tuple[int, ...]:
    S = tuple(int(i) for i in S)
    if not S:
        raise InvalidParameters("S must be nonempty")
    if len(S) > k:
        raise InvalidParameters(f"|S| = {len(S)} exceeds k = {k}")
    if list(S) != sorted(set(S)) or any(not 0 <= i < k for i in S):
        raise InvalidParameters(f"S must be a sorted subset of range({k}), got {S}")
    return S


def build_deviation_tensor(
    inst: Instance,
    S: Sequence[int],
    restrict_rel: Optional[int] = None,
    normalized: bool = False,
) -> DeviationTensor:
    """Deviation tensor of an instance (or of one relation's subinstance).

    Args:
        inst: The instance.
        S: Sorted scope positions.
        restrict_rel: Keep only constraints of this relation; the expected
            count becomes m_expected * rho(restrict_rel).
        normalized: Divide entries by the realized constraint count.
    """
    S = _check_positions(S, inst.k)
    if restrict_rel is not None:
        inst = inst.restrict_to_relation(restrict_rel)
    counts = Counter(tuple(c.scope[i] for i in S) for c in inst.constraints)
    p_ord = Fraction(inst.m_expected) / math.perm(inst.n, inst.k)
    background = p_ord * math.perm(inst.n - len(S), inst.k - len(S))
    logger.debug("deviation tensor S=%s: %d live tuples, background %.4g", S, len(counts), float(background))
    return DeviationTensor(
        S=S,
        n=inst.n,
        k=inst.k,
        counts=dict(sorted(counts.items())),
        background=background,
        m=inst.m,
        m_expected=inst.m_expected,
        normalized=normalized,
        relation_index=restrict_rel,
        q=inst.q,
    )


def sq_term(C: DeviationTensor) -> Fraction:
    """Sum of squared entries over all injective tuples, exactly."""
    b = C.background
    total = sum(((c - b) ** 2 - b ** 2 for c in C.counts.values()), Fraction(0))
    total += b ** 2 * C.support_size
    return C.scale ** 2 * total


def _digits(flat: np.ndarray, n: int, order: int) -> np.ndarray:
    flat = np.asarray(flat, dtype=np.int64)
    out = np.empty((flat.size, order), dtype=np.int64)
    for j in reversed(range(order)):
        flat, out[:, j] = np.divmod(flat, n)
    return out


def _distinct(digits: np.ndarray) -> np.ndarray:
    ok = np.ones(digits.shape[0], dtype=bool)
    for i, j in itertools.combinations(range(digits.shape[1]), 2):
        ok &= digits[:, i] != digits[:, j]
    return ok


@dataclass(eq=False)
class CrossTensor:
    """C~[alpha, gamma] = sum_t C[alpha, t] C[gamma, t] for alpha != gamma.

    Split each injective s-tuple as (alpha, t) with c the integer counts and
    M the injectivity indicator. Then C~ = scale^2 (X - b Y + b^2 Z) with

        X = c c^T                       kept as sorted sparse off-diagonal entries
        Y = c M^T + M c^T               from the row sums of c
        Z = M M^T = n - |alpha u gamma|  for injective alpha and gamma

    and a zero diagonal. Nothing of size n^(s-1) x n^(s-1) is stored.
    """

    tensor: DeviationTensor
    x_keys: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    x_values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    row_keys: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    row_sums: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.tensor.n

    @property
    def order(self) -> int:
        return self.tensor.size - 1

    @property
    def rows(self) -> int:
        return self.n ** self.order

    def _half_y(self, alpha: np.ndarray, gamma_digits: np.ndarray, gamma_ok: np.ndarray) -> np.ndarray:
        # sum_t c[alpha, t] over t outside gamma
        total = _lookup(self.row_keys, self.row_sums, alpha)
        for j in range(self.order):
            total = total - self.tensor.counts_at(alpha * self.n + gamma_digits[:, j])
        return np.where(gamma_ok, total, 0)

    def parts_at(self, alpha: np.ndarray, gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer (X, Y, Z) at paired flat row indices, zero where alpha == gamma."""
        alpha = np.asarray(alpha, dtype=np.int64).ravel()
        gamma = np.asarray(gamma, dtype=np.int64).ravel()
        off = alpha != gamma
        a_digits = _digits(alpha, self.n, self.order)
        g_digits = _digits(gamma, self.n, self.order)
        a_ok = _distinct(a_digits)
        g_ok = _distinct(g_digits)

        X = _lookup(self.x_keys, self.x_values, alpha * self.rows + gamma)
        Y = self._half_y(alpha, g_digits, g_ok) + self._half_y(gamma, a_digits, a_ok)
        union = np.full(alpha.size, self.order, dtype=np.int64)
        for j in range(self.order):
            union += np.all(g_digits[:, j : j + 1] != a_digits, axis=1)
        Z = np.where(a_ok & g_ok, self.n - union, 0)
        return np.where(off, X, 0), np.where(off, Y, 0), np.where(off, Z, 0)

    def value(self, alpha: Sequence[int], gamma: Sequence[int]) -> Fraction:
        i = flat_index(np.array(alpha, dtype=np.int64).reshape(1, -1), self.n)
        j = flat_index(np.array(gamma, dtype=np.int64).reshape(1, -1), self.n)
        X, Y, Z = self.parts_at(i, j)
        return self._combine(int(X[0]), int(Y[0]), int(Z[0]))

    def _combine(self, x: int, y: int, z: int) -> Fraction:
        b = self.tensor.background
        return self.tensor.scale ** 2 * (x - b * y + b * b * z)

    def items(self):
        """Nonzero entries as ((alpha, gamma), value), row-major over injective rows."""
        tuples = np.array(list(itertools.permutations(range(self.n), self.order)), dtype=np.int64)
        live = flat_index(tuples.reshape(len(tuples), self.order), self.n)
        for i, alpha in zip(live.tolist(), tuples.tolist()):
            X, Y, Z = self.parts_at(np.full(live.size, i), live)
            for j in np.flatnonzero((X != 0) | (Y != 0) | (Z != 0)).tolist():
                v = self._combine(int(X[j]), int(Y[j]), int(Z[j]))
                if v != 0:
                    yield (tuple(alpha), tuple(tuples[j].tolist())), v

    def is_zero(self) -> bool:
        return next(iter(self.items()), None) is None

    def evaluate(self, x: Assignment | Sequence[int], beta: Sequence[int]) -> Fraction:
        """C~_beta(x) = sum_{alpha != gamma} C~[alpha, gamma] 1[x_alpha = x_gamma = beta restricted to S'].

        Summed per t as (sum_alpha C[alpha, t])^2 - sum_alpha C[alpha, t]^2 over
        injective alpha with x_alpha equal to the head of beta.
        """
        values = tuple(x.values if isinstance(x, Assignment) else x)
        head = tuple(beta)[: self.order]
        b = self.tensor.background
        hit_sum = [0] * self.n
        hit_sq = [0] * self.n
        for key, c in self.tensor.counts.items():
            if all(values[v] == a for v, a in zip(key[:-1], head)):
                hit_sum[key[-1]] += c
                hit_sq[key[-1]] += c * c

        total = Fraction(0)
        for t in range(self.n):
            free = injective_count(values[:t] + values[t + 1 :], head)
            line = hit_sum[t] - b * free
            total += line * line - (hit_sq[t] - 2 * b * hit_sum[t] + b * b * free)
        return self.tensor.scale ** 2 * total


def build_cross_tensor(C: DeviationTensor, cfg: Optional[RefuterConfig] = None) -> CrossTensor:
    """Cross tensor of an odd-order deviation tensor, split on the last position of S.

    Raises:
        WrongMode: even |S|.
        ResourceLimit: more sparse X entries than the tensor cap allows.
    """
    use_config = cfg or config
    if C.size % 2 == 0:
        raise WrongMode(f"cross tensor needs odd |S|, got {C.size}")
    rows = C.n ** (C.size - 1)
    if rows * rows >= 2 ** 63:
        raise ResourceLimit("cross_tensor_index", rows * rows, 2 ** 63 - 1)

    keys, values = C._sorted_keys
    alpha, t = np.divmod(keys, C.n)
    live_rows, row_of = np.unique(alpha, return_inverse=True)
    row_of = row_of.ravel()
    per_column = np.bincount(t, minlength=C.n)
    products = sum(int(v) * int(v) for v in per_column)
    if products > use_config.tensor_cap:
        raise ResourceLimit("cross_tensor", products, use_config.tensor_cap)

    row_sums = np.zeros(live_rows.size, dtype=np.int64)
    np.add.at(row_sums, row_of, values)
    c2 = sp.csr_array((values, (row_of, t)), shape=(live_rows.size, C.n), dtype=np.int64)
    X = (c2 @ c2.T).tocoo()
    keep = (X.row != X.col) & (X.data != 0)
    x_keys = live_rows[X.row[keep]] * rows + live_rows[X.col[keep]]
    order = np.argsort(x_keys)
    logger.debug("cross tensor S=%s: %d off-diagonal products over %d live rows", C.S, order.size, live_rows.size)
    return CrossTensor(
        tensor=C,
        x_keys=x_keys[order].astype(np.int64),
        x_values=X.data[keep][order].astype(np.int64),
        row_keys=live_rows.astype(np.int64),
        row_sums=row_sums,
    )
