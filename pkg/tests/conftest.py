"""Shared fixtures."""

import itertools

import pytest

from csp_refuter.config import RefuterConfig
from csp_refuter.csp.domain import Constraint, Instance
from csp_refuter.csp.relations import full, not_equal, preset_family, single_family


@pytest.fixture
def cfg() -> RefuterConfig:
    """Small caps and a single worker thread."""
    return RefuterConfig(threads=1, cache_url=None)


@pytest.fixture
def neq_family():
    return single_family(not_equal(2))


@pytest.fixture
def one_in_three():
    return preset_family("one-in-three")


@pytest.fixture
def triangle(neq_family) -> Instance:
    """Boolean NEQ on a triangle: opt = 2/3."""
    constraints = (Constraint((0, 1), 0), Constraint((1, 2), 0), Constraint((0, 2), 0))
    return Instance(n=3, constraints=constraints, family=neq_family, seed=None, m_expected=3.0)


@pytest.fixture
def complete_triples() -> Instance:
    """Every ordered triple of 5 variables once, so every deviation tensor is zero."""
    constraints = tuple(Constraint(scope, 0) for scope in itertools.permutations(range(5), 3))
    return Instance(n=5, constraints=constraints, family=single_family(full(2, 3)), m_expected=60.0)
