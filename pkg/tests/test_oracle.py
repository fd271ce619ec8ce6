"""Exhaustive oracles, planted distributions and the certificate verification suite."""

import itertools
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from csp_refuter.config import RefuterConfig
from csp_refuter.csp.domain import Constraint, Instance, MarginalVector
from csp_refuter.csp.evaluate import brute_opt
from csp_refuter.csp.relations import one_in_k, preset_family, random_relation, single_family, xor
from csp_refuter.csp.sampling import sample_instance
from csp_refuter.errors import DegenerateInstance, PreconditionViolation, ResourceLimit
from csp_refuter.kikuchi.tensor import build_deviation_tensor
from csp_refuter.lp.twise import solve_primal
from csp_refuter.oracle import (
    brute_deviation_max,
    check_marginal_invariance,
    check_separator_independence,
    deviation_value,
    empirical_opt_check,
    exhaustive_opt,
    planted_distribution,
    verify_certificate,
    vertex_lp_optimum,
)
from csp_refuter.oracle.planted import is_separator
from csp_refuter.oracle.suite import FAIL, PASS
from csp_refuter.refuter.pipeline import refute


class TestBrute:
    def test_agrees_with_main_path(self, cfg):
        for seed in range(5):
            inst = sample_instance(preset_family("nae3"), 7, 14, seed=seed)
            value, witness = exhaustive_opt(inst, cfg)
            main_value, main_witness = brute_opt(inst, cfg)
            assert value == main_value
            assert witness == main_witness.values

    def test_deviation_value_matches_tensor(self):
        inst = sample_instance(preset_family("xor3"), 6, 15, seed=2)
        C = build_deviation_tensor(inst, (0, 2), restrict_rel=1)
        for x in [(0, 1, 0, 1, 1, 0), (1, 1, 1, 0, 0, 0)]:
            for beta in itertools.product((0, 1), repeat=2):
                assert deviation_value(inst, (0, 2), beta, x, rel_index=1) == C.evaluate(x, beta)

    def test_deviation_max_example(self, triangle, cfg):
        # x = (1, 0, 0): no hits against a background of 1/2 on two matching pairs
        value = brute_deviation_max(triangle, (0, 1), (0, 1), normalized=False, cfg=cfg)
        assert value == 1
        assert brute_deviation_max(triangle, (0, 1), (0, 1), cfg=cfg) == Fraction(1, 3)

    def test_oracle_cap(self):
        inst = sample_instance(preset_family("neq"), 5, 6, seed=0)
        with pytest.raises(ResourceLimit):
            exhaustive_opt(inst, RefuterConfig(oracle_cap=16))
        with pytest.raises(ResourceLimit):
            brute_deviation_max(inst, (0,), (1,), cfg=RefuterConfig(oracle_cap=16))


class TestVertexLP:
    def test_one_in_three_biased_marginal(self, cfg):
        nu = MarginalVector((Fraction(2, 3), Fraction(1, 3)))
        truth, vertex = vertex_lp_optimum(one_in_k(3), nu, 2)
        value, _ = solve_primal(one_in_k(3), nu, 2, exact=True, cfg=cfg)
        assert abs(float(truth) - float(value)) <= 1e-9
        assert sum(vertex) == 1

    def test_basis_cap(self):
        with pytest.raises(ResourceLimit):
            vertex_lp_optimum(xor(3, 0), MarginalVector.uniform(2), 2, basis_cap=1)


def pairwise_density(rng: np.random.Generator, nu: MarginalVector, cfg):
    rel = random_relation(2, 3, 0.5, rng)
    _, table = solve_primal(rel, nu, 2, exact=True, cfg=cfg)
    return table


def random_scopes(rng: np.random.Generator, n: int, m: int) -> tuple:
    return tuple(Constraint(tuple(int(v) for v in rng.choice(n, 3, replace=False)), 0) for _ in range(m))


class TestPlanted:
    FAMILY = single_family(xor(3, 0))

    def test_xor_planted_is_supported_on_solutions(self, cfg):
        J = Instance(n=4, constraints=(Constraint((0, 1, 2), 0), Constraint((1, 2, 3), 0)), family=self.FAMILY)
        even = {x: Fraction(1, 4) for x in itertools.product((0, 1), repeat=3) if sum(x) % 2 == 0}
        mu = planted_distribution(J, {0: even}, MarginalVector.uniform(2), cfg=cfg)
        assert sum(mu.table.values()) == 1
        for b, p in mu.table.items():
            if p:
                assert (b[0] + b[1] + b[2]) % 2 == 0 and (b[1] + b[2] + b[3]) % 2 == 0
        assert mu.project((0,)) == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}

    def test_rejects_non_independent_density(self, cfg):
        J = Instance(n=3, constraints=(Constraint((0, 1, 2), 0),), family=self.FAMILY)
        point = {(0, 0, 0): Fraction(1)}
        with pytest.raises(PreconditionViolation):
            planted_distribution(J, {0: point}, MarginalVector.uniform(2), cfg=cfg)

    def test_marginal_invariance_precondition(self, cfg):
        J = Instance(n=4, constraints=(Constraint((0, 1, 2), 0), Constraint((0, 1, 2), 0)), family=self.FAMILY)
        even = {x: Fraction(1, 4) for x in itertools.product((0, 1), repeat=3) if sum(x) % 2 == 0}
        with pytest.raises(PreconditionViolation):
            check_marginal_invariance(J, (3,), 1, {0: even}, MarginalVector.uniform(2), cfg=cfg)

    def test_separator_precondition(self, cfg):
        J = Instance(n=4, constraints=(Constraint((0, 1, 2), 0),), family=self.FAMILY)
        assert not is_separator(J, (0,), (2,), ())
        with pytest.raises(PreconditionViolation):
            check_separator_independence(J, (0,), (2,), (), {0: {}}, MarginalVector.uniform(2), cfg=cfg)

    def test_randomized_marginal_invariance(self, cfg):
        rng = np.random.default_rng(31)
        checked = 0
        for _ in range(200):
            n = int(rng.integers(4, 7))
            nu = MarginalVector.from_counts([int(rng.integers(1, 4)), int(rng.integers(1, 4))])
            densities = {0: pairwise_density(rng, nu, cfg)}
            J = Instance(n=n, constraints=random_scopes(rng, n, int(rng.integers(1, 4))), family=self.FAMILY)
            S = tuple(sorted(int(v) for v in rng.choice(n, int(rng.integers(1, 3)), replace=False)))
            C = int(rng.integers(0, J.m))
            try:
                assert check_marginal_invariance(J, S, C, densities, nu, cfg=cfg)
            except (PreconditionViolation, DegenerateInstance):
                continue
            checked += 1
        assert checked >= 50

    def test_randomized_separator_independence(self, cfg):
        rng = np.random.default_rng(47)
        checked = 0
        for _ in range(200):
            n = int(rng.integers(4, 7))
            nu = MarginalVector.from_counts([int(rng.integers(1, 4)), int(rng.integers(1, 4))])
            densities = {0: pairwise_density(rng, nu, cfg)}
            J = Instance(n=n, constraints=random_scopes(rng, n, int(rng.integers(1, 3))), family=self.FAMILY)
            order = [int(v) for v in rng.permutation(n)]
            S, T = (order[0],), (order[1],)
            R = tuple(sorted(order[2:2 + int(rng.integers(0, n - 1))]))
            if not is_separator(J, S, T, R):
                continue
            try:
                assert check_separator_independence(J, S, T, R, densities, nu, cfg=cfg)
            except DegenerateInstance:
                continue
            checked += 1
        assert checked >= 50


class TestEmpirical:
    def test_gap_report(self, neq_family, cfg):
        report = empirical_opt_check(neq_family, 2, [6, 10], lambda n: 3 * n, seeds=(0, 1, 2), epsilon=0.05, cfg=cfg)
        assert report.reference == pytest.approx(0.5, abs=0.05)
        assert [row.n for row in report.rows] == [6, 10]
        assert all(len(row.gaps) == 3 for row in report.rows)
        # random graphs cut more than half their edges
        assert all(v >= 0.5 for row in report.rows for v in row.values)
        data = report.to_dict()
        assert set(data) == {"reference_opt_t", "t", "rows", "shrinking"}


class TestVerification:
    @pytest.fixture
    def pair(self, cfg):
        inst = sample_instance(preset_family("neq"), 8, 20, seed=4)
        return inst, refute(inst, 2, 1, 0.2, cfg=cfg)

    def test_passes_on_honest_certificate(self, pair, cfg):
        inst, cert = pair
        report = verify_certificate(cert, inst, cfg)
        outcomes = {c.name: c.outcome for c in report.checks}
        assert report.passed
        assert outcomes["bound_vs_opt"] == PASS
        assert outcomes["deviation_vs_brute"] == PASS
        assert outcomes["lp_duality"] == PASS
        assert outcomes["slack_accounting"] == PASS

    def test_detects_lowered_bound(self, pair, cfg):
        inst, cert = pair
        report = verify_certificate(replace(cert, bound=0.1), inst, cfg)
        assert not report.passed
        assert {c.name: c.outcome for c in report.checks}["bound_vs_opt"] == FAIL

    def test_detects_wrong_instance(self, pair, cfg):
        _, cert = pair
        other = sample_instance(preset_family("neq"), 8, 20, seed=5)
        report = verify_certificate(cert, other, cfg)
        assert {c.name: c.outcome for c in report.checks}["instance_digest"] == FAIL
        assert report.to_dict()["passed"] is False
