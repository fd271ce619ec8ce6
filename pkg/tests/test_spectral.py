"""Spectral norms, per-(S, beta) certificates and the norm-scaling bench."""

import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

from csp_refuter.config import RefuterConfig
from csp_refuter.csp.domain import Constraint, Instance
from csp_refuter.csp.relations import not_equal, preset_family, single_family
from csp_refuter.csp.sampling import sample_instance
from csp_refuter.errors import InvalidParameters, ResourceLimit, UndefinedValue, WrongMode
from csp_refuter.kikuchi import build_cross_tensor, build_deviation_tensor, build_kikuchi_even, build_kikuchi_odd
from csp_refuter.oracle.brute import all_assignments, brute_deviation_max, deviation_value
from csp_refuter.spectral.bench import (
    CSV_COLUMNS,
    BenchPoint,
    bench_norm_scaling,
    median_table,
    predicted_norm,
    write_csv,
)
from csp_refuter.spectral.certify import (
    CERTIFIED,
    HEURISTIC,
    NON_CONVERGED,
    DeviationCertificate,
    certify_combined,
    certify_deviation,
    round_up,
    sqrt_up,
)
from csp_refuter.spectral.norms import (
    DENSE_EXACT,
    ESTIMATE,
    EXACT,
    ITERATIVE,
    auto_mode,
    power_norm,
    spectral_norm,
)


class TestNorms:
    def test_dense_exact(self, cfg):
        M = np.array([[0.0, 2.0], [2.0, 0.0]])
        norm = spectral_norm(M, EXACT, cfg=cfg)
        assert norm.method == DENSE_EXACT
        assert norm.certified
        assert norm.value >= 2.0
        assert norm.value - 2.0 < 1e-12

    def test_matches_eigvalsh(self, cfg):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((30, 30))
        M = A + A.T
        norm = spectral_norm(sp.csr_array(M), EXACT, cfg=cfg)
        truth = np.max(np.abs(np.linalg.eigvalsh(M)))
        assert norm.value >= truth
        assert norm.raw_value == pytest.approx(truth, rel=1e-12)

    def test_power_iteration(self, cfg):
        M = np.diag([3.0, -5.0, 1.0])
        norm = spectral_norm(M, ESTIMATE, cfg=cfg)
        assert norm.method == ITERATIVE
        assert not norm.certified
        assert norm.converged
        assert norm.raw_value == pytest.approx(5.0, rel=1e-6)
        assert norm.value == pytest.approx(5.0 * cfg.power_safety, rel=1e-6)

    def test_power_iteration_reports_non_convergence(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((40, 40))
        norm = power_norm(A + A.T, tol=1e-15, safety=1.0, max_iter=3)
        assert not norm.converged
        assert norm.iterations == 3

    def test_zero_operator(self, cfg):
        norm = spectral_norm(np.zeros((4, 4)), EXACT, cfg=cfg)
        assert norm.value == 0.0
        assert norm.certified

    def test_dense_cap(self):
        small = RefuterConfig(dense_cap=3, threads=1)
        M = np.eye(5)
        with pytest.raises(ResourceLimit):
            spectral_norm(M, EXACT, cfg=small)
        assert auto_mode(M, small) == ESTIMATE
        assert auto_mode(np.eye(3), small) == EXACT

    def test_unknown_mode(self, cfg):
        with pytest.raises(InvalidParameters):
            spectral_norm(np.eye(2), "fast", cfg=cfg)


class TestRounding:
    def test_round_up_never_below(self):
        for value in [Fraction(1, 3), Fraction(2, 7), Fraction(10 ** 20 + 1, 3)]:
            assert Fraction(round_up(value)) >= value

    def test_sqrt_up(self):
        assert sqrt_up(4) == 2.0
        assert Fraction(sqrt_up(Fraction(2))) ** 2 >= 2
        assert sqrt_up(0) == 0.0


def brute_combined(inst, W, coefficients, rel_index=None):
    m = inst.restrict_to_relation(rel_index).m if rel_index is not None else inst.m
    best = Fraction(0)
    for x in all_assignments(inst.n, inst.q):
        total = sum((c * deviation_value(inst, W, b, x, rel_index) for b, c in coefficients.items()), Fraction(0))
        best = max(best, abs(total))
    return best / m


class TestCertifyDeviation:
    @pytest.fixture
    def neq_instance(self):
        return sample_instance(single_family(not_equal(2)), 6, 10, seed=3)

    def test_linear_bound_is_tight(self, neq_instance, cfg):
        cert = certify_deviation(neq_instance, 0, (0,), (1,), 1, cfg=cfg)
        truth = brute_deviation_max(neq_instance, (0,), (1,), rel_index=0, cfg=cfg)
        assert cert.method == "linear-exact"
        assert cert.bound >= truth
        assert cert.bound - float(truth) < 1e-12

    @pytest.mark.parametrize("ell", [1, 2])
    @pytest.mark.parametrize("beta", [(0, 0), (0, 1)])
    def test_even_bound_is_sound(self, neq_instance, ell, beta, cfg):
        cert = certify_deviation(neq_instance, 0, (0, 1), beta, ell, cfg=cfg)
        truth = brute_deviation_max(neq_instance, (0, 1), beta, rel_index=0, cfg=cfg)
        assert cert.status == CERTIFIED
        assert cert.method == "even-kikuchi"
        assert cert.bound >= float(truth)

    @pytest.mark.parametrize("beta", [(0, 0, 0), (1, 0, 1)])
    def test_odd_bound_is_sound(self, beta, cfg):
        inst = sample_instance(preset_family("nae3"), 6, 15, seed=8)
        cert = certify_deviation(inst, 0, (0, 1, 2), beta, 2, cfg=cfg)
        truth = brute_deviation_max(inst, (0, 1, 2), beta, rel_index=0, cfg=cfg)
        assert cert.method == "odd-kikuchi"
        assert cert.sq_term is not None
        assert cert.bound >= float(truth)

    def test_recompute_matches(self, neq_instance, cfg):
        cert = certify_deviation(neq_instance, 0, (0, 1), (1, 0), 1, cfg=cfg)
        assert abs(cert.recompute_bound() - cert.bound) <= 1e-12

    def test_estimate_mode_is_heuristic(self, neq_instance, cfg):
        cert = certify_deviation(neq_instance, 0, (0, 1), (1, 0), 1, norm_mode=ESTIMATE, cfg=cfg)
        assert cert.status in (HEURISTIC, NON_CONVERGED)
        assert cert.norm_used.method == ITERATIVE

    def test_round_trip(self, neq_instance, cfg):
        cert = certify_deviation(neq_instance, 0, (0, 1), (1, 1), 2, cfg=cfg)
        data = cert.to_dict()
        again = DeviationCertificate.from_dict(data)
        assert again.to_dict() == data
        assert again.certificate_id == "r0:S01:b11:l2"

    def test_beta_length_checked(self, neq_instance, cfg):
        with pytest.raises(InvalidParameters):
            certify_deviation(neq_instance, 0, (0, 1), (1,), 1, cfg=cfg)

    @pytest.mark.parametrize("S,beta,ell", [((0, 1), (0, 1), 1), ((1, 2), (1, 1), 2), ((0, 1, 2), (1, 0, 1), 2)])
    def test_zero_background_certifies_zero(self, complete_triples, S, beta, ell, cfg):
        cert = certify_deviation(complete_triples, 0, S, beta, ell, cfg=cfg)
        assert cert.bound == 0
        assert cert.status == CERTIFIED
        assert brute_deviation_max(complete_triples, S, beta, rel_index=0, cfg=cfg) == 0

    def test_zero_background_operators_have_zero_norm(self, complete_triples, cfg):
        even = build_kikuchi_even(build_deviation_tensor(complete_triples, (0, 1)), (0, 1), 1, cfg)
        cross = build_cross_tensor(build_deviation_tensor(complete_triples, (0, 1, 2)), cfg)
        odd = build_kikuchi_odd(cross, (0, 0, 1), 2, cfg)
        for op in (even, odd):
            assert spectral_norm(op, EXACT, cfg=cfg).value == 0.0

    def test_empty_relation_is_undefined(self, cfg):
        inst = Instance(n=4, constraints=(Constraint((0, 1, 2), 0),), family=preset_family("xor3"))
        with pytest.raises(UndefinedValue):
            certify_deviation(inst, 1, (0,), (0,), 1, cfg=cfg)


class TestCertifyCombined:
    def test_linear_combination_is_tight(self, cfg):
        inst = sample_instance(single_family(not_equal(2)), 6, 10, seed=5)
        coefficients = {(0,): Fraction(1), (1,): Fraction(-1, 2)}
        cert = certify_combined(inst, 0, (1,), coefficients, 1, cfg=cfg)
        truth = brute_combined(inst, (1,), coefficients, 0)
        assert cert.method == "combined-linear"
        assert cert.bound >= float(truth)
        assert cert.bound - float(truth) < 1e-12

    def test_even_combination_is_sound(self, cfg):
        inst = sample_instance(single_family(not_equal(2)), 6, 10, seed=5)
        coefficients = {(0, 1): Fraction(1, 3), (1, 1): Fraction(-2, 3), (0, 0): Fraction(1, 4)}
        cert = certify_combined(inst, 0, (0, 1), coefficients, 1, cfg=cfg)
        truth = brute_combined(inst, (0, 1), coefficients, 0)
        assert cert.method == "combined-even"
        assert cert.bound >= float(truth)
        assert cert.certificate_id.startswith("r0:S01:bQ")

    def test_odd_combination_rejected(self, cfg):
        inst = sample_instance(preset_family("nae3"), 6, 12, seed=0)
        with pytest.raises(WrongMode):
            certify_combined(inst, 0, (0, 1, 2), {(0, 0, 0): 1}, 2, cfg=cfg)


class TestBench:
    def test_predicted_shape(self):
        even = predicted_norm(16, 64, 2, 2)
        assert even == pytest.approx(math.sqrt(64 / 16) * math.sqrt(2) * math.sqrt(2 * math.log(16)))
        odd = predicted_norm(16, 64, 2, 3)
        assert odd == pytest.approx(64 / 16 ** 1.5 * 2 * math.sqrt(2 * math.log(16)))

    def test_sweep_and_medians(self, cfg):
        points = [BenchPoint(8, 16, 1, 2), BenchPoint(8, 32, 1, 2)]
        rows = bench_norm_scaling(points, seeds=(0, 1, 2), cfg=cfg)
        assert len(rows) == 6
        assert [(r.m, r.seed) for r in rows][:3] == [(16, 0), (16, 1), (16, 2)]
        assert all(r.norm >= 0 and r.certified for r in rows)
        table = median_table(rows)
        assert [row["m"] for row in table] == [16, 32]
        assert all(row["seeds"] == 3 for row in table)

    def test_sweep_is_reproducible(self, cfg):
        point = [BenchPoint(7, 20, 2, 2)]
        first = bench_norm_scaling(point, seeds=(4,), cfg=cfg)
        second = bench_norm_scaling(point, seeds=(4,), cfg=cfg)
        assert first[0].norm == second[0].norm

    def test_csv(self, cfg):
        rows = bench_norm_scaling([BenchPoint(6, 10, 1, 2)], seeds=(0,), cfg=cfg)
        stream = io.StringIO()
        assert write_csv(rows, stream) == 1
        parsed = list(csv.DictReader(io.StringIO(stream.getvalue())))
        assert list(parsed[0].keys()) == CSV_COLUMNS
        assert parsed[0]["parity"] == "even"

    def test_points_need_two_positions(self, cfg):
        with pytest.raises(InvalidParameters):
            bench_norm_scaling([BenchPoint(6, 10, 1, 1)], seeds=(0,), cfg=cfg)


class TestNormBounds:
    def test_exact_dominates_rayleigh_quotients(self, cfg):
        inst = sample_instance(preset_family("nae3"), 6, 15, seed=2)
        C = build_deviation_tensor(inst, (0, 1, 2))
        ops = [
            build_kikuchi_even(build_deviation_tensor(inst, (0, 2)), (1, 0), 2, cfg),
            build_kikuchi_odd(build_cross_tensor(C, cfg), (0, 1, 1), 2, cfg),
        ]
        rng = np.random.default_rng(5)
        for op in ops:
            norm = spectral_norm(op, EXACT, cfg=cfg)
            M = op.to_dense(cfg)
            for _ in range(100):
                v = rng.standard_normal(op.dim)
                assert norm.value >= abs(v @ M @ v) / (v @ v)

    @pytest.mark.slow
    def test_doubling_m_grows_even_norm_by_about_sqrt_two(self, cfg):
        points = [BenchPoint(64, 2048, 1, 2), BenchPoint(64, 4096, 1, 2)]
        table = median_table(bench_norm_scaling(points, seeds=range(10), cfg=cfg))
        growth = table[1]["median_norm"] / table[0]["median_norm"]
        assert 1.2 <= growth <= 1.7


@pytest.mark.slow
class TestRatioStability:
    """Measured over predicted norm stays within a factor of 4 across an m-sweep."""

    @staticmethod
    def spread(table) -> float:
        ratios = [row["median_ratio"] for row in table]
        assert min(ratios) > 0
        return max(ratios) / min(ratios)

    def test_even_sweep(self, cfg):
        points = [BenchPoint(64, m, 1, 2) for m in (256, 512, 1024, 2048, 4096)]
        table = median_table(bench_norm_scaling(points, seeds=range(10), cfg=cfg))
        assert all(row["seeds"] == 10 for row in table)
        assert self.spread(table) < 4

    def test_odd_sweep(self, cfg):
        points = [BenchPoint(24, m, 2, 3) for m in (256, 512, 1024)]
        table = median_table(bench_norm_scaling(points, seeds=range(10), cfg=cfg))
        assert self.spread(table) < 4
