"""Level-ell Kikuchi index spaces and indicator lifts.

An index is a set of ell triples (v, a, label) whose (v, label) pairs are
distinct. Pairs are numbered p = v * |L| + label. The live space lists
every ell-combination of pair ids (colex rank) times every assignment of
values to them, so

    position = combo_rank * q^ell + value_code

with the values read in increasing pair-id order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Assignment
from csp_refuter.errors import InvalidParameters, ResourceLimit


@dataclass(frozen=True, order=True)
class KikuchiIndex:
    """Canonically sorted (v, a, label) triples."""

    elements: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        elements = tuple(sorted((int(v), int(a), int(j)) for v, a, j in self.elements))
        object.__setattr__(self, "elements", elements)
        pairs = [(v, j) for v, _, j in elements]
        if len(set(pairs)) != len(pairs):
            raise InvalidParameters(f"index {elements} repeats a (variable, label) pair")

    def __len__(self) -> int:
        return len(self.elements)

    def indicator(self, x: Assignment | Sequence[int]) -> int:
        values = x.values if isinstance(x, Assignment) else x
        return int(all(values[v] == a for v, a, _ in self.elements))

    def serialize(self) -> str:
        return ",".join(f"{v}:{a}:{j}" for v, a, j in self.elements)


class IndexSpace:
    """Live level-ell indices over n variables, q values and num_labels labels."""

    def __init__(
        self,
        n: int,
        q: int,
        num_labels: int,
        ell: int,
        cfg: Optional[RefuterConfig] = None,
        index_cap: Optional[int] = None,
    ):
        cap = index_cap if index_cap is not None else (cfg or config).index_cap
        if ell < 1:
            raise InvalidParameters(f"ell must be positive, got {ell}")
        self.n = n
        self.q = q
        self.num_labels = num_labels
        self.ell = ell
        self.pairs = n * num_labels
        if ell > self.pairs:
            raise InvalidParameters(f"ell = {ell} exceeds n * |L| = {self.pairs}")
        self.combos = math.comb(self.pairs, ell)
        self.dim = self.combos * q ** ell
        if self.dim > cap:
            raise ResourceLimit("kikuchi_index", self.dim, cap)

    @cached_property
    def _binom(self) -> np.ndarray:
        table = np.zeros((self.pairs + 1, self.ell + 2), dtype=np.int64)
        for p in range(self.pairs + 1):
            for i in range(self.ell + 2):
                table[p, i] = math.comb(p, i)
        return table

    def positions(self, pairs: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Positions of indices given unsorted pair ids and values (one index per row)."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, self.ell)
        values = np.asarray(values, dtype=np.int64).reshape(-1, self.ell)
        order = np.argsort(pairs, axis=1, kind="stable")
        pairs = np.take_along_axis(pairs, order, axis=1)
        values = np.take_along_axis(values, order, axis=1)
        rank = np.zeros(pairs.shape[0], dtype=np.int64)
        code = np.zeros(pairs.shape[0], dtype=np.int64)
        for i in range(self.ell):
            rank += self._binom[pairs[:, i], i + 1]
            code = code * self.q + values[:, i]
        return rank * self.q ** self.ell + code

    def position(self, index: KikuchiIndex) -> int:
        if len(index) != self.ell:
            raise InvalidParameters(f"index has {len(index)} elements, space has level {self.ell}")
        pairs = [v * self.num_labels + j for v, _, j in index.elements]
        values = [a for _, a, _ in index.elements]
        return int(self.positions(np.array([pairs]), np.array([values]))[0])

    def _unrank_combo(self, rank: int) -> list[int]:
        combo = []
        for i in range(self.ell, 0, -1):
            c = i - 1
            while math.comb(c + 1, i) <= rank:
                c += 1
            combo.append(c)
            rank -= math.comb(c, i)
        return combo[::-1]

    def index_at(self, position: int) -> KikuchiIndex:
        rank, code = divmod(int(position), self.q ** self.ell)
        pairs = self._unrank_combo(rank)
        values = []
        for _ in range(self.ell):
            code, a = divmod(code, self.q)
            values.append(a)
        values.reverse()
        return KikuchiIndex(tuple(
            (p // self.num_labels, a, p % self.num_labels) for p, a in zip(pairs, values)
        ))

    def all_pair_combos(self) -> np.ndarray:
        combos = np.array(list(itertools.combinations(range(self.pairs), self.ell)), dtype=np.int64)
        return combos.reshape(-1, self.ell)

    def lift(self, x: Assignment | Sequence[int]) -> np.ndarray:
        """0/1 indicator lift as a dense int64 vector of length dim."""
        values = np.asarray(x.values if isinstance(x, Assignment) else x, dtype=np.int64)
        if values.shape[0] != self.n:
            raise InvalidParameters(f"assignment has length {values.shape[0]}, expected {self.n}")
        combos = self.all_pair_combos()
        out = np.zeros(self.dim, dtype=np.int64)
        out[self.positions(combos, values[combos // self.num_labels])] = 1
        return out


def lift_norm_squared(n: int, num_labels: int, ell: int) -> int:
    """||x^(ell)||^2 = C(n |L|, ell) for every assignment."""
    return math.comb(n * num_labels, ell)


def indicator_lift(
    x: Assignment | Sequence[int],
    ell: int,
    num_labels: int,
    q: int,
    cfg: Optional[RefuterConfig] = None,
) -> np.ndarray:
    values = x.values if isinstance(x, Assignment) else tuple(x)
    return IndexSpace(len(values), q, num_labels, ell, cfg).lift(values)
