"""Per-(S, beta) deviation certificates.

Every bound returned here is an upper bound on max_x |C_{S,beta}(x)| / m,
with m the realized constraint count of the relation's subinstance:

    |S| = 1          exact, from the positive and negative entry sums
    |S| even         C(n|S|, ell) * ||M_beta|| / identity factor
    |S| odd          sqrt(n * (sq_term + C(n|L|, ell) * ||M_beta|| / identity factor))
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Instance
from csp_refuter.errors import InvalidParameters, UndefinedValue, WrongMode
from csp_refuter.kikuchi.index import lift_norm_squared
from csp_refuter.kikuchi.operators import (
    EVEN,
    ODD,
    build_kikuchi_even,
    build_kikuchi_odd,
    combined_operator,
    num_labels,
)
from csp_refuter.kikuchi.tensor import DeviationTensor, build_cross_tensor, build_deviation_tensor, sq_term
from csp_refuter.spectral.norms import NormEstimate, auto_mode, spectral_norm

logger = logging.getLogger(__name__)

CERTIFIED = "certified"
HEURISTIC = "heuristic"
NON_CONVERGED = "non-converged"


def round_up(value) -> float:
    """Smallest float >= an exact rational (or float) value."""
    exact = Fraction(value)
    out = float(exact)
    while Fraction(out) < exact:
        out = math.nextafter(out, math.inf)
    return out


def sqrt_up(value) -> float:
    """Float upper bound on the square root of a nonnegative rational."""
    exact = Fraction(value)
    if exact <= 0:
        return 0.0
    out = math.sqrt(float(exact))
    while Fraction(out) ** 2 < exact:
        out = math.nextafter(out, math.inf)
    return out


@dataclass
class DeviationCertificate:
    S: tuple[int, ...]
    beta: Optional[tuple[int, ...]]
    ell: int
    bound: float
    method: str
    status: str = CERTIFIED
    relation_index: Optional[int] = None
    norm_used: Optional[NormEstimate] = None
    n: int = 0
    m: int = 0
    identity_factor: int = 1
    lift_norm: int = 0
    sq_term: Optional[float] = None
    coefficients: Optional[dict] = None
    slack_terms: dict = field(default_factory=dict)

    @property
    def certificate_id(self) -> str:
        if self.beta is not None:
            beta = "".join(str(a) for a in self.beta)
        else:
            coeffs = repr(sorted((b, str(c)) for b, c in (self.coefficients or {}).items()))
            beta = "Q" + hashlib.sha1(coeffs.encode("utf-8")).hexdigest()[:10]
        S = "".join(str(i) for i in self.S)
        return f"r{self.relation_index}:S{S}:b{beta}:l{self.ell}"

    def recompute_bound(self) -> float:
        """Bound re-derived from the recorded norm and binomial ratios."""
        if self.norm_used is None or self.m == 0:
            return self.bound
        cross = Fraction(self.lift_norm) * Fraction(self.norm_used.value) / self.identity_factor
        if self.sq_term is None:
            return round_up(cross / self.m)
        return round_up(Fraction(sqrt_up(self.n * (Fraction(self.sq_term) + cross))) / self.m)

    def to_dict(self) -> dict:
        return {
            "id": self.certificate_id,
            "relation": self.relation_index,
            "S": list(self.S),
            "beta": list(self.beta) if self.beta is not None else None,
            "coefficients": (
                [[list(b), str(c)] for b, c in sorted(self.coefficients.items())]
                if self.coefficients else None
            ),
            "ell": self.ell,
            "bound": self.bound,
            "method": self.method,
            "status": self.status,
            "norm": self.norm_used.to_dict() if self.norm_used else None,
            "n": self.n,
            "m": self.m,
            "identity_factor": self.identity_factor,
            "lift_norm": self.lift_norm,
            "sq_term": self.sq_term,
            "slack_terms": self.slack_terms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> DeviationCertificate:
        norm = data.get("norm")
        coefficients = data.get("coefficients")
        return cls(
            S=tuple(data["S"]),
            beta=tuple(data["beta"]) if data.get("beta") is not None else None,
            ell=data["ell"],
            bound=data["bound"],
            method=data["method"],
            status=data["status"],
            relation_index=data.get("relation"),
            norm_used=NormEstimate(**norm) if norm else None,
            n=data["n"],
            m=data["m"],
            identity_factor=data["identity_factor"],
            lift_norm=data["lift_norm"],
            sq_term=data.get("sq_term"),
            coefficients={tuple(b): Fraction(c) for b, c in coefficients} if coefficients else None,
            slack_terms=data.get("slack_terms", {}),
        )


def _status(norm: Optional[NormEstimate]) -> str:
    if norm is None or norm.certified:
        return CERTIFIED
    return HEURISTIC if norm.converged else NON_CONVERGED


def _slack_terms(C: DeviationTensor) -> dict:
    return {
        "edge_ratio": C.m_expected / C.m if C.m else None,
        "ordered_tuple_correction": C.k ** 2 / C.n,
    }


def _tensor(inst: Instance, rel_index: Optional[int], S: Sequence[int], tensor: Optional[DeviationTensor]):
    C = tensor if tensor is not None else build_deviation_tensor(inst, S, rel_index)
    if C.m == 0:
        raise UndefinedValue(f"relation {rel_index} has no constraints to normalize by")
    return C


def certify_deviation(
    inst: Instance,
    rel_index: Optional[int],
    S: Sequence[int],
    beta: Sequence[int],
    ell: int,
    norm_mode: Optional[str] = None,
    seed: int = 0,
    tensor: Optional[DeviationTensor] = None,
    cfg: Optional[RefuterConfig] = None,
) -> DeviationCertificate:
    """Upper bound on max_x |C_{S,beta}(x)| / m for one relation's subinstance.

    Args:
        inst: The full instance.
        rel_index: Relation whose constraints form the subinstance (None for all).
        S: Sorted scope positions.
        beta: Local assignment on S.
        ell: Kikuchi level (ignored for |S| = 1).
        norm_mode: "exact", "estimate" or None to pick by the dense cap.
        seed: Seed of power-iteration starts.
        tensor: Prebuilt deviation tensor for (rel_index, S).
    """
    use_config = cfg or config
    C = _tensor(inst, rel_index, S, tensor)
    s = C.size
    beta = tuple(int(a) for a in beta)
    if len(beta) != s:
        raise InvalidParameters(f"beta {beta} does not match |S| = {s}")
    common = dict(S=C.S, beta=beta, ell=ell, relation_index=rel_index, n=C.n, m=C.m, slack_terms=_slack_terms(C))

    if s == 1:
        return DeviationCertificate(bound=round_up(C.linear_bound() / C.m), method="linear-exact", **common)
    if C.is_zero():
        return DeviationCertificate(bound=0.0, method="zero", **common)

    mode = EVEN if s % 2 == 0 else ODD
    labels = num_labels(mode, s)
    lift = lift_norm_squared(C.n, labels, ell)
    if mode == EVEN:
        op = build_kikuchi_even(C, beta, ell, use_config)
    else:
        op = build_kikuchi_odd(build_cross_tensor(C, use_config), beta, ell, use_config)
    norm = spectral_norm(op, norm_mode or auto_mode(op, use_config), seed=seed, cfg=use_config)
    cross = Fraction(lift) * Fraction(norm.value) / op.identity_factor

    if mode == EVEN:
        bound = round_up(cross / C.m)
        sq = None
    else:
        sq = sq_term(C)
        bound = round_up(Fraction(sqrt_up(C.n * (sq + cross))) / C.m)
        sq = round_up(sq)

    certificate = DeviationCertificate(
        bound=bound,
        method=f"{mode}-kikuchi",
        status=_status(norm),
        norm_used=norm,
        identity_factor=op.identity_factor,
        lift_norm=lift,
        sq_term=sq,
        **common,
    )
    logger.debug("certificate %s: bound %.6g (%s)", certificate.certificate_id, bound, certificate.status)
    return certificate


def certify_combined(
    inst: Instance,
    rel_index: Optional[int],
    W: Sequence[int],
    coefficients: dict,
    ell: int,
    norm_mode: Optional[str] = None,
    seed: int = 0,
    tensor: Optional[DeviationTensor] = None,
    cfg: Optional[RefuterConfig] = None,
) -> DeviationCertificate:
    """Upper bound on max_x |sum_b c(b) C_{W,b}(x)| / m for |W| = 1 or even |W|."""
    use_config = cfg or config
    C = _tensor(inst, rel_index, W, tensor)
    s = C.size
    coefficients = {tuple(b): Fraction(c) for b, c in coefficients.items() if c != 0}
    common = dict(
        S=C.S, beta=None, ell=ell, relation_index=rel_index, n=C.n, m=C.m,
        coefficients=coefficients, slack_terms=_slack_terms(C),
    )

    if s == 1:
        weights = [coefficients.get((a,), Fraction(0)) for a in range(C.q)]
        high = Fraction(0)
        low = Fraction(0)
        for v in range(C.n):
            e = C.counts.get((v,), 0) - C.background
            options = [e * w for w in weights]
            high += max(options)
            low += min(options)
        return DeviationCertificate(bound=round_up(max(high, -low) / C.m), method="combined-linear", **common)
    if s % 2:
        raise WrongMode(f"combined certificates need |W| = 1 or even, got {s}")
    if C.is_zero() or not coefficients:
        return DeviationCertificate(bound=0.0, method="zero", **common)

    op = combined_operator(C, coefficients, ell, use_config)
    norm = spectral_norm(op, norm_mode or auto_mode(op, use_config), seed=seed, cfg=use_config)
    lift = lift_norm_squared(C.n, num_labels(EVEN, s), ell)
    bound = round_up(Fraction(lift) * Fraction(norm.value) / op.identity_factor / C.m)
    return DeviationCertificate(
        bound=bound,
        method="combined-even",
        status=_status(norm),
        norm_used=norm,
        identity_factor=op.identity_factor,
        lift_norm=lift,
        **common,
    )
