"""Oracle suite run against a refutation certificate."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from csp_refuter.config import RefuterConfig, config
from csp_refuter.csp.domain import Instance, MarginalVector
from csp_refuter.csp.io import instance_digest
from csp_refuter.errors import RefuterError, ResourceLimit
from csp_refuter.oracle.brute import brute_deviation_max, exhaustive_opt
from csp_refuter.oracle.lp import vertex_lp_optimum
from csp_refuter.refuter.certificate import STATUS_CERTIFIED, RefutationCertificate

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "csp-refuter/verify-report/v1"
RECOMPUTE_TOLERANCE = 1e-12
SLACK_TOLERANCE = 1e-9
LP_TOLERANCE = 1e-6

PASS = "pass"
FAIL = "fail"
SKIP = "skip"


@dataclass
class CheckResult:
    name: str
    outcome: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "outcome": self.outcome, "detail": self.detail}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.outcome != FAIL for c in self.checks)

    def add(self, name: str, ok: Optional[bool], detail: str = "") -> None:
        outcome = SKIP if ok is None else (PASS if ok else FAIL)
        self.checks.append(CheckResult(name, outcome, detail))

    def to_dict(self) -> dict:
        return {
            "version": REPORT_SCHEMA,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _check_recompute(report: VerificationReport, cert: RefutationCertificate) -> None:
    worst = 0.0
    for dev in cert.deviation_certificates:
        recomputed = dev.recompute_bound()
        worst = max(worst, abs(recomputed - dev.bound) / max(1.0, abs(dev.bound)))
    report.add("recompute_bounds", worst <= RECOMPUTE_TOLERANCE, f"worst relative drift {worst:.3g}")


def _check_slack(report: VerificationReport, cert: RefutationCertificate) -> None:
    items = sum(v for name, v in cert.slack.items() if name != "total")
    drift = abs(items - cert.slack.get("total", 0.0))
    report.add("slack_accounting", drift <= SLACK_TOLERANCE, f"items {items:.12g} vs total {cert.slack.get('total')}")


def _check_soundness(report: VerificationReport, cert: RefutationCertificate, inst: Instance, cfg) -> None:
    try:
        value, witness = exhaustive_opt(inst, cfg)
    except ResourceLimit as e:
        report.add("bound_vs_opt", None, str(e))
        return
    report.add(
        "bound_vs_opt",
        cert.bound >= value,
        f"bound {cert.bound:.9g} vs opt {float(value):.9g} at {''.join(map(str, witness))}",
    )


def _check_deviations(report: VerificationReport, cert: RefutationCertificate, inst: Instance, cfg) -> None:
    checked, violations = 0, []
    for dev in cert.deviation_certificates:
        if dev.beta is None:
            continue
        try:
            truth = brute_deviation_max(inst, dev.S, dev.beta, dev.relation_index, cfg=cfg)
        except ResourceLimit as e:
            report.add("deviation_vs_brute", None, str(e))
            return
        checked += 1
        if Fraction(dev.bound) < truth:
            violations.append(dev.certificate_id)
    detail = f"{checked} certificates checked" + (f", violations: {violations}" if violations else "")
    report.add("deviation_vs_brute", not violations if checked else None, detail)


def _check_duality(report: VerificationReport, cert: RefutationCertificate, inst: Instance) -> None:
    if not cert.best_marginal:
        report.add("lp_duality", None, "no marginal recorded")
        return
    nu = MarginalVector.from_floats(cert.best_marginal)
    point = next(p for p in cert.per_point if p["nu"] == cert.best_marginal)
    drift = 0.0
    for r_key, value in point["values"].items():
        rel = inst.family.relations[int(r_key)]
        try:
            truth, _ = vertex_lp_optimum(rel, nu, cert.t)
        except RefuterError as e:
            report.add("lp_duality", None, str(e))
            return
        drift = max(drift, abs(float(truth) - value))
    report.add("lp_duality", drift <= LP_TOLERANCE, f"max |dual - vertex primal| {drift:.3g}")


def verify_certificate(
    cert: RefutationCertificate,
    inst: Instance,
    cfg: Optional[RefuterConfig] = None,
) -> VerificationReport:
    """Run every applicable oracle against a certificate; oversized checks are skipped."""
    use_config = cfg or config
    report = VerificationReport()
    digest = instance_digest(inst)
    report.add("instance_digest", digest == cert.instance_digest, digest)
    report.add("bound_range", 0.0 <= cert.bound <= 1.0 and not math.isnan(cert.bound), f"bound {cert.bound}")
    statuses = {r.status for r in cert.relations}
    report.add("relations_accounted", abs(sum(r.mass for r in cert.relations) - 1.0) <= SLACK_TOLERANCE,
               f"statuses {sorted(statuses)}; certified relations {sum(r.status == STATUS_CERTIFIED for r in cert.relations)}")
    _check_recompute(report, cert)
    _check_slack(report, cert)
    _check_soundness(report, cert, inst, use_config)
    _check_deviations(report, cert, inst, use_config)
    _check_duality(report, cert, inst)
    logger.info("verification %s (%d checks)", "passed" if report.passed else "FAILED", len(report.checks))
    return report
