"""Refutation certificate document."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from csp_refuter.csp.io import dumps
from csp_refuter.spectral.certify import CERTIFIED, HEURISTIC, DeviationCertificate

CERTIFICATE_SCHEMA = "csp-refuter/certificate/v1"

STATUS_CERTIFIED = "certified"
STATUS_BAD = "bad"
STATUS_LIGHT = "light"


@dataclass
class RelationStatus:
    index: int
    mass: float
    status: str
    m: int
    m_expected: float
    max_dual_l1: Optional[float] = None
    certificates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "mass": self.mass,
            "status": self.status,
            "m": self.m,
            "m_expected": self.m_expected,
            "max_dual_l1": self.max_dual_l1,
            "certificates": list(self.certificates),
        }


@dataclass
class RefutationCertificate:
    """Certified upper bound on max_x Val(x) with everything needed to re-check it.

    bound = max over marginal points of
        sum_heavy mass_r * min(1, c_0 + ratio_r * E[Q_r - c_0] + deviation_r) + light_mass + bad_mass
    """

    instance_digest: str
    n: int
    m: int
    q: int
    k: int
    t: int
    ell: int
    epsilon: float
    mode: str
    heavy_threshold: float
    bound: float
    soundness_mode: str = CERTIFIED
    relations: list = field(default_factory=list)
    net: dict = field(default_factory=dict)
    per_point: list = field(default_factory=list)
    deviation_certificates: list = field(default_factory=list)
    best_marginal: list = field(default_factory=list)
    light_mass: float = 0.0
    bad_mass: float = 0.0
    slack: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    schema: str = CERTIFICATE_SCHEMA

    @property
    def heuristic(self) -> bool:
        return self.soundness_mode == HEURISTIC

    def certificates_by_id(self) -> dict[str, DeviationCertificate]:
        return {c.certificate_id: c for c in self.deviation_certificates}

    def to_dict(self) -> dict:
        return {
            "version": self.schema,
            "instance_digest": self.instance_digest,
            "n": self.n,
            "m": self.m,
            "q": self.q,
            "k": self.k,
            "t": self.t,
            "ell": self.ell,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "heavy_threshold": self.heavy_threshold,
            "bound": self.bound,
            "soundness_mode": self.soundness_mode,
            "best_marginal": self.best_marginal,
            "light_mass": self.light_mass,
            "bad_mass": self.bad_mass,
            "slack": self.slack,
            "budget": self.budget,
            "relations": [r.to_dict() for r in self.relations],
            "net": self.net,
            "per_point": self.per_point,
            "deviation_certificates": [c.to_dict() for c in self.deviation_certificates],
        }

    def dumps(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> RefutationCertificate:
        return cls(
            instance_digest=data["instance_digest"],
            n=data["n"],
            m=data["m"],
            q=data["q"],
            k=data["k"],
            t=data["t"],
            ell=data["ell"],
            epsilon=data["epsilon"],
            mode=data["mode"],
            heavy_threshold=data["heavy_threshold"],
            bound=data["bound"],
            soundness_mode=data["soundness_mode"],
            relations=[RelationStatus(**r) for r in data.get("relations", [])],
            net=data.get("net", {}),
            per_point=data.get("per_point", []),
            deviation_certificates=[
                DeviationCertificate.from_dict(c) for c in data.get("deviation_certificates", [])
            ],
            best_marginal=data.get("best_marginal", []),
            light_mass=data.get("light_mass", 0.0),
            bad_mass=data.get("bad_mass", 0.0),
            slack=data.get("slack", {}),
            budget=data.get("budget", {}),
            schema=data.get("version", CERTIFICATE_SCHEMA),
        )
