"""CSP core - domains, relations, instances, sampling and evaluation."""

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
from csp_refuter.csp.sampling import sample_instance

__all__ = [
    "Assignment",
    "Constraint",
    "DomainSpec",
    "Instance",
    "MarginalVector",
    "Relation",
    "RelationFamily",
    "brute_opt",
    "count_vector",
    "empirical_relation_distribution",
    "eval_value",
    "marginal_vector",
    "sample_instance",
]
