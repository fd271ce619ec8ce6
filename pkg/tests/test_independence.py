"""t-wise independence verdicts and polynomial separators."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from csp_refuter.csp.domain import MarginalVector
from csp_refuter.csp.relations import equality, full, literal_family, not_equal, one_in_k, xor
from csp_refuter.lp.independence import (
    NO,
    UNKNOWN,
    YES,
    is_t_wise_independent,
    low_weight_strings,
    pairwise_character_polynomial,
    pairwise_character_sum,
    polynomial_separator,
    sample_biased_strings,
    separates_low_weight,
    supported_distribution,
)


class TestVerdicts:
    def test_full_relation_is_independent_at_uniform(self, cfg):
        verdict = is_t_wise_independent(full(2, 3), 2, cfg=cfg)
        assert verdict.answer == YES
        assert verdict.marginal == MarginalVector.uniform(2)
        assert verdict.distribution.supported_in(full(2, 3))
        assert verdict.distribution.is_t_wise_independent(verdict.marginal, 2)

    def test_neq_is_not_pairwise_independent(self, cfg):
        verdict = is_t_wise_independent(not_equal(2), 2, cfg=cfg)
        assert verdict.answer == NO
        assert verdict.min_margin > 0

    def test_equality_only_at_degenerate_marginals(self, cfg):
        verdict = is_t_wise_independent(equality(2, 2), 2, cfg=cfg)
        assert verdict.answer == YES
        assert verdict.marginal.probs in {(Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))}

    def test_xor_is_pairwise_uniform(self, cfg):
        verdict = is_t_wise_independent(xor(3, 0), 2, cfg=cfg)
        assert verdict.answer == YES
        assert verdict.marginal == MarginalVector.uniform(2)

    def test_verdict_serializes(self, cfg):
        data = is_t_wise_independent(not_equal(2), 2, cfg=cfg).to_dict()
        assert data["answer"] == NO
        assert data["marginal"] is None
        assert data["net_points"] == 11

    def test_answers_are_tri_state(self, cfg):
        verdict = is_t_wise_independent(one_in_k(3), 3, cfg=cfg)
        assert verdict.answer in (YES, NO, UNKNOWN)


class TestLiteralFamilies:
    """Shift-closed families are t-wise independent exactly when t-wise uniform."""

    def test_xor_shifts_supported_at_uniform(self, cfg):
        fam = literal_family(xor(3, 1))
        nu = MarginalVector.uniform(2)
        for rel in fam.relations:
            assert supported_distribution(rel, nu, 2, cfg=cfg) is not None

    def test_neq_shifts_have_no_common_marginal(self, cfg):
        fam = literal_family(not_equal(2))
        verdicts = [is_t_wise_independent(rel, 2, cfg=cfg).answer for rel in fam.relations]
        assert NO in verdicts


class TestPolynomialSeparator:
    def test_neq_uniform_separator(self, cfg):
        rel = not_equal(2)
        nu = MarginalVector.uniform(2)
        f = polynomial_separator(rel, nu, 2, cfg=cfg)
        assert f is not None
        assert f.expectation(nu) == 0
        assert all(f.evaluate(a) > 0 for a in rel.satisfying())

    def test_full_relation_has_no_separator(self, cfg):
        assert polynomial_separator(full(2, 2), MarginalVector.uniform(2), 2, cfg=cfg) is None

    def test_zero_marginal_entries_restrict_support(self, cfg):
        # Under nu = delta_1 only (1, 1) matters, and equality contains it
        nu = MarginalVector.point_mass(2, 1)
        assert polynomial_separator(equality(2, 2), nu, 2, cfg=cfg) is None


class TestLowWeightSeparator:
    def test_closed_form_matches_pair_sum(self):
        for a in itertools.product((0, 1), repeat=6):
            direct = sum((1 - 2 * a[i]) * (1 - 2 * a[j]) for i in range(6) for j in range(i + 1, 6))
            assert pairwise_character_sum(a) == direct

    def test_indicator_form_matches_closed_form(self):
        f = pairwise_character_polynomial(5)
        for a in itertools.product((0, 1), repeat=5):
            assert f.evaluate(a) == pairwise_character_sum(a)

    @pytest.mark.parametrize("seed", range(3))
    def test_biased_relation_low_weight_strings(self, seed):
        k, p = 40, 1 / 20
        rng = np.random.default_rng(seed)
        strings = sample_biased_strings(k, 4 * k * k, p, rng)
        assert len(low_weight_strings(strings, p)) > 0
        assert separates_low_weight(strings, p)

    def test_heavy_strings_are_not_separated(self):
        strings = np.array([[1] * 20 + [0] * 20])
        assert pairwise_character_sum(strings[0]) < 0
        assert len(low_weight_strings(strings, 1 / 20)) == 0
