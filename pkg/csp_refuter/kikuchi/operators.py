"""Kikuchi operators for indicator deviations.

Even |S|: labels are the positions of S. M_beta[I, J] = C_S[gamma] whenever
I symmetric-difference J holds exactly one triple (gamma_i, beta_i, i) per
label, half of them in I.

Odd |S|: labels are two copies of S' = S minus its last position. The
symmetric difference holds (alpha_i, beta_i, i) and (gamma_i, beta_i, i')
for every i in S', with exactly (|S| - 1)/2 triples of each copy in I, and
M_beta[I, J] = C~[alpha, gamma].

Entries are kept as a few integer sparse matrices with rational
coefficients, so quadratic forms can be evaluated exactly.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import IO, Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from csp_refuter.config import RefuterConfig, config
from csp_refuter.errors import InvalidParameters, ResourceLimit, WrongMode
from csp_refuter.kikuchi.index import IndexSpace
from csp_refuter.kikuchi.tensor import CrossTensor, DeviationTensor, flat_index

logger = logging.getLogger(__name__)

EVEN = "even"
ODD = "odd"


def num_labels(mode: str, s: int) -> int:
    return s if mode == EVEN else 2 * (s - 1)


def even_identity_factor(n: int, s: int, ell: int) -> int:
    return math.comb((n - 1) * s, ell - s // 2) * math.comb(s, s // 2)


def odd_identity_factor(n: int, s: int, ell: int) -> int:
    h = (s - 1) // 2
    return math.comb(2 * (n - 1) * (s - 1), ell - s + 1) * math.comb(s - 1, h) ** 2


def minimum_level(s: int) -> int:
    """Smallest ell with well-behaved pairs: |S|/2 (even), |S| - 1 (odd)."""
    return s // 2 if s % 2 == 0 else s - 1


def check_level(s: int, ell: int) -> None:
    if s % 2 == 1 and s < 3:
        raise InvalidParameters("odd Kikuchi operators need |S| >= 3")
    if ell < minimum_level(s):
        raise InvalidParameters(f"ell = {ell} is below the minimum level {minimum_level(s)} for |S| = {s}")


@dataclass(frozen=True)
class PatternSet:
    """Nonzero positions of M_beta and the tensor key each one reads."""

    rows: np.ndarray
    cols: np.ndarray
    keys: np.ndarray
    dim: int


def _pattern_count(mode: str, n: int, q: int, s: int, ell: int) -> int:
    slots = s if mode == EVEN else 2 * (s - 1)
    free = ell - slots // 2
    if mode == EVEN:
        vertices = math.perm(n, s)
        splits = math.comb(s, s // 2)
    else:
        a = math.perm(n, s - 1)
        vertices = a * a - a
        splits = math.comb(s - 1, (s - 1) // 2) ** 2
    return vertices * splits * math.comb(n * num_labels(mode, s) - slots, free) * q ** free


@lru_cache(maxsize=32)
def kikuchi_patterns(mode: str, n: int, q: int, s: int, beta: tuple, ell: int, index_cap: int) -> PatternSet:
    """Enumerate every well-behaved (I, J) for one beta.

    Each pair arises exactly once from (vertex assignment, split of the
    slots between I and J, shared part K = I intersect J).
    """
    L = num_labels(mode, s)
    if mode == EVEN:
        G = np.array(list(itertools.permutations(range(n), s)), dtype=np.int64).reshape(-1, s)
        keys = flat_index(G, n) if G.size else np.zeros(0, dtype=np.int64)
        slot_labels = np.arange(s)
        slot_values = np.array(beta, dtype=np.int64)
        splits = [list(A) for A in itertools.combinations(range(s), s // 2)]
    else:
        half = s - 1
        A = np.array(list(itertools.permutations(range(n), half)), dtype=np.int64).reshape(-1, half)
        left, right = np.nonzero(~np.eye(A.shape[0], dtype=bool))
        G = np.concatenate([A[left], A[right]], axis=1)
        flat = flat_index(A, n)
        keys = flat[left] * n ** half + flat[right]
        slot_labels = np.arange(2 * half)
        slot_values = np.array(tuple(beta[:half]) * 2, dtype=np.int64)
        h = half // 2
        splits = [
            list(a) + [half + i for i in b]
            for a in itertools.combinations(range(half), h)
            for b in itertools.combinations(range(half), h)
        ]

    slots = slot_labels.size
    free = ell - slots // 2
    space = IndexSpace(n, q, L, ell, index_cap=index_cap)
    F = G * L + slot_labels[None, :]

    Kp = np.array(list(itertools.combinations(range(n * L), free)), dtype=np.int64).reshape(math.comb(n * L, free), free)
    Kv = np.array(list(itertools.product(range(q), repeat=free)), dtype=np.int64).reshape(q ** free, free)
    clash = np.zeros((G.shape[0], Kp.shape[0]), dtype=bool)
    for a in range(free):
        for b in range(slots):
            clash |= Kp[None, :, a] == F[:, None, b]
    gi, ki = np.nonzero(~clash)

    rows, cols, out_keys = [], [], []
    for A_slots in splits:
        B_slots = [i for i in range(slots) if i not in A_slots]
        I_pairs = np.concatenate([Kp[ki], F[gi][:, A_slots]], axis=1)
        J_pairs = np.concatenate([Kp[ki], F[gi][:, B_slots]], axis=1)
        I_tail = np.broadcast_to(slot_values[A_slots], (gi.size, len(A_slots)))
        J_tail = np.broadcast_to(slot_values[B_slots], (gi.size, len(B_slots)))
        for v in Kv:
            head = np.broadcast_to(v, (gi.size, free))
            rows.append(space.positions(I_pairs, np.concatenate([head, I_tail], axis=1)))
            cols.append(space.positions(J_pairs, np.concatenate([head, J_tail], axis=1)))
            out_keys.append(keys[gi])

    def _cat(chunks):
        return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)

    patterns = PatternSet(rows=_cat(rows), cols=_cat(cols), keys=_cat(out_keys), dim=space.dim)
    logger.debug("%s patterns n=%d s=%d ell=%d: %d nonzeros over dim %d", mode, n, s, ell, patterns.rows.size, space.dim)
    return patterns


def _sparse(values: np.ndarray, patterns: PatternSet) -> sp.csr_array:
    matrix = sp.csr_array(
        (values.astype(np.int64), (patterns.rows, patterns.cols)),
        shape=(patterns.dim, patterns.dim),
    )
    matrix.eliminate_zeros()
    return matrix


@dataclass(eq=False)
class KikuchiOperator:
    """Symmetric operator sum_i coeff_i * P_i with integer sparse parts P_i."""

    mode: str
    S: tuple[int, ...]
    beta: Optional[tuple[int, ...]]
    ell: int
    space: IndexSpace
    parts: list = field(default_factory=list)
    identity_factor: int = 1
    coefficients: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @cached_property
    def matrix(self) -> sp.csr_array:
        total = sp.csr_array((self.dim, self.dim), dtype=float)
        for coeff, part in self.parts:
            if coeff != 0 and part.nnz:
                total = total + float(coeff) * part.astype(float)
        return total

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.matvec, rmatvec=self.matvec, dtype=float)

    def to_dense(self, cfg: Optional[RefuterConfig] = None) -> np.ndarray:
        use_config = cfg or config
        if self.dim > use_config.dense_cap:
            raise ResourceLimit("kikuchi_dense", self.dim, use_config.dense_cap)
        return self.matrix.toarray()

    def quadratic_form(self, v: np.ndarray) -> Fraction:
        """v^T M v in exact arithmetic for an integer vector v."""
        v = np.asarray(v, dtype=np.int64)
        return sum((coeff * int(v @ (part @ v)) for coeff, part in self.parts), Fraction(0))

    def exact_entries(self) -> dict:
        entries: dict = {}
        for coeff, part in self.parts:
            coo = part.tocoo()
            for i, j, value in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
                entries[(i, j)] = entries.get((i, j), Fraction(0)) + coeff * value
        return {key: value for key, value in entries.items() if value != 0}

    def is_zero(self) -> bool:
        return not self.exact_entries()

    def is_symmetric(self) -> bool:
        return all((part != part.T).nnz == 0 for _, part in self.parts)

    def triplets(self) -> list[tuple[str, str, str]]:
        """(I, J, value) with canonical index strings, sorted by position."""
        out = []
        for (i, j), value in sorted(self.exact_entries().items()):
            out.append((self.space.index_at(i).serialize(), self.space.index_at(j).serialize(), str(value)))
        return out

    def export_triplets(self, stream: IO[str]) -> int:
        rows = self.triplets()
        for I, J, value in rows:
            stream.write(f"{I}\t{J}\t{value}\n")
        return len(rows)

    @classmethod
    def combine(cls, operators: Sequence[KikuchiOperator], weights: Sequence) -> KikuchiOperator:
        """sum_b weights[b] * M_b over operators sharing (mode, S, ell)."""
        first = operators[0]
        parts = []
        coefficients = {}
        for op, w in zip(operators, weights):
            w = Fraction(w)
            parts.extend((w * coeff, part) for coeff, part in op.parts)
            coefficients[op.beta] = w
        return cls(
            mode=first.mode,
            S=first.S,
            beta=None,
            ell=first.ell,
            space=first.space,
            parts=parts,
            identity_factor=first.identity_factor,
            coefficients=coefficients,
        )


def _check_beta(beta: Sequence[int], s: int, q: int) -> tuple[int, ...]:
    beta = tuple(int(a) for a in beta)
    if len(beta) != s or any(not 0 <= a < q for a in beta):
        raise InvalidParameters(f"beta {beta} is not in D^{s} for q={q}")
    return beta


def build_kikuchi_even(
    C: DeviationTensor,
    beta: Sequence[int],
    ell: int,
    cfg: Optional[RefuterConfig] = None,
) -> KikuchiOperator:
    use_config = cfg or config
    s = C.size
    if s % 2:
        raise WrongMode(f"even Kikuchi operator needs even |S|, got {s}")
    check_level(s, ell)
    beta = _check_beta(beta, s, C.q)
    required = _pattern_count(EVEN, C.n, C.q, s, ell)
    if required > use_config.index_cap:
        raise ResourceLimit("kikuchi_even", required, use_config.index_cap)

    patterns = kikuchi_patterns(EVEN, C.n, C.q, s, beta, ell, use_config.index_cap)
    counts = _sparse(C.counts_at(patterns.keys), patterns)
    ones = _sparse(np.ones(patterns.keys.size, dtype=np.int64), patterns)
    return KikuchiOperator(
        mode=EVEN,
        S=C.S,
        beta=beta,
        ell=ell,
        space=IndexSpace(C.n, C.q, num_labels(EVEN, s), ell, use_config),
        parts=[(C.scale, counts), (-C.background * C.scale, ones)],
        identity_factor=even_identity_factor(C.n, s, ell),
    )


def build_kikuchi_odd(
    cross: CrossTensor,
    beta: Sequence[int],
    ell: int,
    cfg: Optional[RefuterConfig] = None,
) -> KikuchiOperator:
    use_config = cfg or config
    C = cross.tensor
    s = C.size
    if s % 2 == 0:
        raise WrongMode(f"odd Kikuchi operator needs odd |S|, got {s}")
    check_level(s, ell)
    beta = _check_beta(beta, s, C.q)
    required = _pattern_count(ODD, C.n, C.q, s, ell)
    if required > use_config.index_cap:
        raise ResourceLimit("kikuchi_odd", required, use_config.index_cap)

    patterns = kikuchi_patterns(ODD, C.n, C.q, s, beta[: s - 1], ell, use_config.index_cap)
    alpha, gamma = np.divmod(patterns.keys, cross.rows)
    X, Y, Z = cross.parts_at(alpha, gamma)
    b = C.background
    scale2 = C.scale ** 2
    parts = [
        (scale2, _sparse(X, patterns)),
        (-b * scale2, _sparse(Y, patterns)),
        (b * b * scale2, _sparse(Z, patterns)),
    ]
    return KikuchiOperator(
        mode=ODD,
        S=C.S,
        beta=beta,
        ell=ell,
        space=IndexSpace(C.n, C.q, num_labels(ODD, s), ell, use_config),
        parts=parts,
        identity_factor=odd_identity_factor(C.n, s, ell),
    )


def combined_operator(
    C: DeviationTensor,
    coefficients: dict,
    ell: int,
    cfg: Optional[RefuterConfig] = None,
) -> KikuchiOperator:
    """M_Q = sum_b c(b) M_b for an even-order tensor and coefficients keyed by beta."""
    items: Iterable = sorted((tuple(b), c) for b, c in coefficients.items() if c != 0)
    items = list(items)
    if not items:
        raise InvalidParameters("combined operator needs at least one nonzero coefficient")
    operators = [build_kikuchi_even(C, b, ell, cfg) for b, _ in items]
    return KikuchiOperator.combine(operators, [c for _, c in items])
