"""JSON documents for families and instances.

The canonical serialization lists satisfying tuples in lexicographic order
and fixes the key order, so gen -> load -> dump is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from csp_refuter.csp.domain import Constraint, DomainSpec, Instance, Relation, RelationFamily

INSTANCE_SCHEMA = "csp-refuter/instance/v1"
FAMILY_SCHEMA = "csp-refuter/family/v1"


class DomainModel(BaseModel):
    size: int
    labels: list[str]


class RelationModel(BaseModel):
    arity: int
    satisfying: list[list[int]]


class ConstraintModel(BaseModel):
    scope: list[int]
    rel: int


class FamilyDocument(BaseModel):
    version: str = FAMILY_SCHEMA
    domain: DomainModel
    relations: list[RelationModel]
    weights: list[float]


class InstanceDocument(BaseModel):
    version: str = INSTANCE_SCHEMA
    domain: DomainModel
    relations: list[RelationModel]
    weights: list[float]
    n: int
    constraints: list[ConstraintModel]
    seed: Optional[int] = None
    m_expected: Optional[float] = None


def _family_payload(family: RelationFamily) -> dict:
    return {
        "domain": {"size": family.domain.size, "labels": list(family.domain.labels)},
        "relations": [
            {"arity": rel.arity, "satisfying": [list(x) for x in rel.satisfying()]}
            for rel in family.relations
        ],
        "weights": list(family.weights),
    }


def family_to_dict(family: RelationFamily) -> dict:
    return {"version": FAMILY_SCHEMA, **_family_payload(family)}


def instance_to_dict(inst: Instance) -> dict:
    return {
        "version": INSTANCE_SCHEMA,
        **_family_payload(inst.family),
        "n": inst.n,
        "constraints": [{"scope": list(c.scope), "rel": c.relation_index} for c in inst.constraints],
        "seed": inst.seed,
        "m_expected": inst.m_expected,
    }


def _family_from_models(domain: DomainModel, relations: list[RelationModel], weights: list[float]) -> RelationFamily:
    spec = DomainSpec(size=domain.size, labels=tuple(domain.labels))
    rels = tuple(Relation.from_tuples(spec.size, r.arity, r.satisfying) for r in relations)
    return RelationFamily(domain=spec, relations=rels, weights=tuple(weights))


def family_from_dict(data: dict) -> RelationFamily:
    doc = FamilyDocument.model_validate(data)
    return _family_from_models(doc.domain, doc.relations, doc.weights)


def instance_from_dict(data: dict) -> Instance:
    doc = InstanceDocument.model_validate(data)
    family = _family_from_models(doc.domain, doc.relations, doc.weights)
    return Instance(
        n=doc.n,
        constraints=tuple(Constraint(tuple(c.scope), c.rel) for c in doc.constraints),
        family=family,
        seed=doc.seed,
        m_expected=doc.m_expected,
    )


def dumps(data: dict) -> str:
    return json.dumps(data, separators=(",", ":")) + "\n"


def dump_instance(inst: Instance) -> str:
    return dumps(instance_to_dict(inst))


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(dump_instance(inst).encode("utf-8")).hexdigest()


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dump_instance(inst), encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_family(path: str | Path) -> RelationFamily:
    return family_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_family(family: RelationFamily, path: str | Path) -> None:
    Path(path).write_text(dumps(family_to_dict(family)), encoding="utf-8")
