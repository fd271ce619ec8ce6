"""Domains, relations, sampling, evaluation and JSON documents."""

import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from csp_refuter.csp.domain import (
    Assignment,
    Constraint,
    DomainSpec,
    Instance,
    MarginalVector,
    Relation,
    RelationFamily,
)
from csp_refuter.csp.evaluate import (
    brute_opt,
    count_vector,
    empirical_relation_distribution,
    eval_value,
    marginal_vector,
)
from csp_refuter.csp.io import (
    INSTANCE_SCHEMA,
    dump_instance,
    family_from_dict,
    family_to_dict,
    instance_digest,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    save_instance,
)
from csp_refuter.csp.relations import (
    PRESETS,
    literal_family,
    mixed_family,
    not_equal,
    preset_family,
    xor,
)
from csp_refuter.csp.sampling import sample_instance, unrank_subset
from csp_refuter.errors import InvalidParameters, ResourceLimit, UndefinedValue


class TestDomainTypes:
    def test_neq_membership_table(self):
        assert not_equal(2).membership == (False, True, True, False)

    def test_satisfying_is_lexicographic(self):
        assert xor(3, 1).satisfying() == [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)]

    def test_domain_labels_must_be_distinct(self):
        with pytest.raises(InvalidParameters):
            DomainSpec(2, ("a", "a"))

    def test_family_weights_must_sum_to_one(self):
        with pytest.raises(InvalidParameters):
            RelationFamily(DomainSpec.of_size(2), (not_equal(2),), (0.5,))

    def test_family_rejects_mixed_arity(self):
        with pytest.raises(InvalidParameters):
            mixed_family([not_equal(2), xor(3, 0)], [0.5, 0.5])

    def test_scope_must_be_injective(self):
        with pytest.raises(InvalidParameters):
            Constraint((1, 1), 0)

    def test_instance_checks_scope_range(self, neq_family):
        with pytest.raises(InvalidParameters):
            Instance(n=2, constraints=(Constraint((0, 2), 0),), family=neq_family)

    def test_m_expected_defaults_to_realized_count(self, neq_family):
        inst = Instance(n=3, constraints=(Constraint((0, 1), 0),), family=neq_family)
        assert inst.m_expected == 1.0

    def test_marginal_from_floats_snaps_to_rationals(self):
        nu = MarginalVector.from_floats([0.3, 0.7])
        assert nu.probs == (Fraction(3, 10), Fraction(7, 10))

    def test_marginal_must_sum_to_one(self):
        with pytest.raises(InvalidParameters):
            MarginalVector((Fraction(1, 2), Fraction(1, 3)))

    def test_unknown_preset(self):
        with pytest.raises(InvalidParameters):
            preset_family("nope")

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_build(self, name):
        fam = preset_family(name)
        assert abs(sum(fam.weights) - 1.0) < 1e-12


class TestLiteralFamily:
    def test_xor_shifts_give_both_parities(self):
        fam = literal_family(xor(3, 0))
        assert len(fam.relations) == 2
        assert {rel.membership for rel in fam.relations} == {xor(3, 0).membership, xor(3, 1).membership}
        assert fam.weights == (0.5, 0.5)

    def test_full_relation_is_shift_invariant(self):
        fam = literal_family(Relation.from_predicate(3, 2, lambda x: True))
        assert len(fam.relations) == 1


class TestSampling:
    def test_unrank_matches_lexicographic_combinations(self):
        expected = list(itertools.combinations(range(6), 3))
        assert [unrank_subset(r, 6, 3) for r in range(math.comb(6, 3))] == expected

    def test_same_seed_same_instance(self, neq_family):
        a = sample_instance(neq_family, 20, 40, seed=7)
        b = sample_instance(neq_family, 20, 40, seed=7)
        assert a == b
        assert dump_instance(a) == dump_instance(b)

    def test_different_seeds_differ(self, neq_family):
        a = sample_instance(neq_family, 30, 60, seed=1)
        b = sample_instance(neq_family, 30, 60, seed=2)
        assert a.constraints != b.constraints

    def test_scopes_are_injective_and_in_range(self):
        fam = preset_family("xor3")
        inst = sample_instance(fam, 12, 80, seed=3)
        for c in inst.constraints:
            assert len(set(c.scope)) == 3
            assert all(0 <= v < 12 for v in c.scope)
            assert c.relation_index in (0, 1)

    def test_expected_count(self, neq_family):
        sizes = [sample_instance(neq_family, 30, 100, seed=s).m for s in range(20)]
        assert abs(np.mean(sizes) - 100) < 12

    def test_beyond_complete_hypergraph(self, neq_family):
        # p = 30 / C(4, 2) = 5 trials per pair, each with probability 1
        inst = sample_instance(neq_family, 4, 30, seed=0)
        assert inst.m == 30
        pairs = {tuple(sorted(c.scope)) for c in inst.constraints}
        assert pairs == set(itertools.combinations(range(4), 2))

    def test_zero_density_gives_empty_instance(self, neq_family):
        assert sample_instance(neq_family, 10, 0, seed=0).m == 0

    def test_n_below_arity(self):
        with pytest.raises(InvalidParameters):
            sample_instance(preset_family("nae3"), 2, 1, seed=0)


class TestEvaluation:
    def test_eval_value(self, triangle):
        assert eval_value(triangle, Assignment((0, 1, 0))) == Fraction(2, 3)
        assert eval_value(triangle, Assignment((0, 0, 0))) == 0

    def test_brute_opt_triangle(self, triangle, cfg):
        value, witness = brute_opt(triangle, cfg)
        assert value == Fraction(2, 3)
        assert witness == Assignment((0, 0, 1))

    def test_brute_opt_cap(self, triangle):
        from csp_refuter.config import RefuterConfig

        with pytest.raises(ResourceLimit):
            brute_opt(triangle, RefuterConfig(cap_states=4))

    def test_empty_instance_value_is_undefined(self, neq_family, cfg):
        inst = Instance(n=3, constraints=(), family=neq_family)
        with pytest.raises(UndefinedValue):
            eval_value(inst, Assignment((0, 0, 0)))
        with pytest.raises(UndefinedValue):
            brute_opt(inst, cfg)

    def test_assignment_length_checked(self, triangle):
        with pytest.raises(InvalidParameters):
            eval_value(triangle, Assignment((0, 1)))

    def test_marginals(self):
        x = Assignment((0, 2, 2, 1))
        assert count_vector(x, 3) == (1, 1, 2)
        assert marginal_vector(x, 3).probs == (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2))

    def test_empirical_relation_distribution(self):
        fam = preset_family("xor3")
        inst = Instance(
            n=4,
            constraints=(Constraint((0, 1, 2), 0), Constraint((1, 2, 3), 1), Constraint((0, 2, 3), 1)),
            family=fam,
        )
        assert empirical_relation_distribution(inst) == (Fraction(1, 3), Fraction(2, 3))


class TestDocuments:
    def test_round_trip_is_byte_identical(self, tmp_path, neq_family):
        inst = sample_instance(neq_family, 16, 24, seed=5)
        path = tmp_path / "inst.json"
        save_instance(inst, path)
        loaded = load_instance(path)
        assert loaded == inst
        assert dump_instance(loaded) == path.read_text(encoding="utf-8")
        assert instance_digest(loaded) == instance_digest(inst)

    def test_document_carries_schema(self, triangle):
        data = json.loads(dump_instance(triangle))
        assert data["version"] == INSTANCE_SCHEMA
        assert data["constraints"][0] == {"scope": [0, 1], "rel": 0}

    def test_m_expected_optional_on_load(self, triangle):
        data = instance_to_dict(triangle)
        del data["m_expected"]
        assert instance_from_dict(data).m_expected == 3.0

    def test_family_round_trip(self):
        fam = preset_family("xor3")
        assert family_from_dict(family_to_dict(fam)) == fam

    def test_digest_changes_with_constraints(self, triangle, neq_family):
        other = Instance(n=3, constraints=triangle.constraints[:2], family=neq_family, m_expected=3.0)
        assert instance_digest(other) != instance_digest(triangle)
