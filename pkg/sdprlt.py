"""SDP-RLT relaxation without an SDP solver.

Optimal values are never computed numerically. They are pinned by a
verified primal-dual pair, bounded above by a feasible lifted point, or
bounded below by a feasible dual point.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from numlin import DEFAULT_PSD_TOL, as_sym_matrix, eig_sym, is_psd, min_eigenvalue, scale_of
from qp_errors import CertificateInvalidError, InfeasibleWitnessError, InvalidInputError
from qp_types import (BoundViolation, BoxQpInstance, ConditionResidual, LiftedPoint,
                      MembershipResult, RltCert, SdpRltCert, VerificationReport,
                      eval_q, partition_of)
from rlt import (DEFAULT_CERT_TOL, check_fr_membership, rlt_dual_conditions,
                 rlt_dual_objective, rlt_slackness_conditions)


@dataclass
class PinnedSdpRltValue:
    value: float
    witness_point: LiftedPoint
    certificate: SdpRltCert

    def to_dict(self) -> dict:
        return {"value": self.value, "witness_point": self.witness_point.to_dict(),
                "certificate": self.certificate.to_dict()}


def _lifted_gram(p: LiftedPoint) -> np.ndarray:
    """[[1, x^T], [x, X]]."""
    n = p.n
    gram = np.empty((n + 1, n + 1))
    gram[0, 0] = 1.0
    gram[0, 1:] = p.x
    gram[1:, 0] = p.x
    gram[1:, 1:] = p.X
    return gram


def _psd_shortfall(A: np.ndarray, tol: float):
    """(max(0, -lambda_min), scaled threshold) for a symmetric matrix."""
    return max(0.0, -min_eigenvalue(A)), tol * scale_of(A)


def check_frs_membership(p: LiftedPoint, tol: float = DEFAULT_CERT_TOL) -> MembershipResult:
    """McCormick feasibility plus X - x x^T PSD."""
    result = check_fr_membership(p.n, p, tol)
    shortfall, threshold = _psd_shortfall(np.array(p.X) - np.outer(p.x, p.x), tol)
    violations = list(result.violations)
    if shortfall > threshold:
        violations.append(BoundViolation("lifted_psd", None, None, shortfall))
    return MembershipResult(not violations, violations)


def _bordered_conditions(p: Optional[LiftedPoint], cert: SdpRltCert, tol: float):
    bordered = cert.bordered()
    shortfall, threshold = _psd_shortfall(bordered, tol)
    conditions = [ConditionResidual("bordered_psd", shortfall, threshold)]
    if p is not None:
        inner = abs(float(np.sum(_lifted_gram(p) * bordered)))
        conditions.append(ConditionResidual("bordered_slack", inner, tol * scale_of(bordered)))
    return conditions


def verify_sdprlt_cert(inst: BoxQpInstance, p: LiftedPoint, cert: SdpRltCert,
                       tol: float = DEFAULT_CERT_TOL) -> VerificationReport:
    """Check that (p, cert) is a primal-dual optimal pair of the SDP-RLT relaxation."""
    if p.n != inst.n or cert.n != inst.n:
        raise InvalidInputError(
            f"instance has n = {inst.n}, point {p.n}, certificate {cert.n}",
            code="dimension_mismatch")
    conditions = rlt_dual_conditions(inst.Q - cert.H, inst.c - cert.h, cert.base, tol)
    # scale the decomposition thresholds by H and h too
    conditions[0].threshold = max(conditions[0].threshold, tol * scale_of(cert.H))
    conditions[1].threshold = max(conditions[1].threshold, tol * scale_of(cert.h))
    conditions += rlt_slackness_conditions(p, cert.base, tol)
    conditions += _bordered_conditions(p, cert, tol)

    fr = check_fr_membership(inst.n, p, tol)
    conditions.append(ConditionResidual("primal_feasible", fr.worst, tol))
    shortfall, threshold = _psd_shortfall(np.array(p.X) - np.outer(p.x, p.x), tol)
    conditions.append(ConditionResidual("lifted_psd", shortfall, threshold))

    violations = list(fr.violations)
    if shortfall > threshold:
        violations.append(BoundViolation("lifted_psd", None, None, shortfall))
    report = VerificationReport("sdprlt", conditions, violations)
    if not report.verified:
        logging.info(f"SDP-RLT certificate rejected: {', '.join(report.failed_conditions)}")
    return report


def sdprlt_dual_objective(cert: SdpRltCert) -> float:
    """-e^T u - 1/2 e^T W e - 1/2 beta."""
    return rlt_dual_objective(cert.base) - 0.5 * cert.beta


def pin_sdprlt_value(inst: BoxQpInstance, p: LiftedPoint, cert: SdpRltCert,
                     tol: float = DEFAULT_CERT_TOL) -> PinnedSdpRltValue:
    """Optimal SDP-RLT value established by a verified primal-dual pair.

    Raises:
        CertificateInvalidError: the pair does not verify or the primal and
            dual objectives disagree.
    """
    report = verify_sdprlt_cert(inst, p, cert, tol)
    if not report.verified:
        raise CertificateInvalidError(
            f"SDP-RLT certificate does not verify: {', '.join(report.failed_conditions)}")
    primal = p.objective(inst)
    dual = sdprlt_dual_objective(cert)
    if abs(primal - dual) > tol * max(1.0, abs(primal)) * max(1.0, inst.scale):
        raise CertificateInvalidError(
            f"primal value {primal:.12g} and dual value {dual:.12g} disagree",
            code="duality_gap")
    return PinnedSdpRltValue(primal, p, cert)


def sdprlt_upper_bound_from_witness(inst: BoxQpInstance, p: LiftedPoint,
                                    tol: float = DEFAULT_CERT_TOL) -> float:
    """Objective at a feasible lifted point, an upper bound on the SDP-RLT optimum.

    Raises:
        InfeasibleWitnessError: p is not SDP-RLT feasible.
    """
    membership = check_frs_membership(p, tol)
    if not membership.member:
        raise InfeasibleWitnessError(
            "witness is not SDP-RLT feasible: "
            + "; ".join(v.describe() for v in membership.violations))
    return p.objective(inst)


def sdprlt_lower_bound_from_dual(inst: BoxQpInstance, cert: SdpRltCert,
                                 tol: float = DEFAULT_CERT_TOL) -> float:
    """Dual objective of a feasible SDP-RLT dual point, a lower bound on the optimum.

    Raises:
        CertificateInvalidError: cert violates a dual feasibility condition.
    """
    conditions = rlt_dual_conditions(inst.Q - cert.H, inst.c - cert.h, cert.base, tol)
    conditions[0].threshold = max(conditions[0].threshold, tol * scale_of(cert.H))
    conditions[1].threshold = max(conditions[1].threshold, tol * scale_of(cert.h))
    conditions += _bordered_conditions(None, cert, tol)
    failed = [cond.name for cond in conditions if not cond.passed]
    if failed:
        raise CertificateInvalidError(f"SDP-RLT dual point is infeasible: {', '.join(failed)}")
    return sdprlt_dual_objective(cert)


def ell_rs_if_exact(inst: BoxQpInstance, x, tol: float = DEFAULT_PSD_TOL) -> Optional[float]:
    """q(x) when the SDP-RLT underestimator provably equals q at x, else None.

    That holds at vertices and wherever Q_BB is PSD.
    """
    part = partition_of(x)
    if part.is_vertex or is_psd(inst.Q[np.ix_(part.B, part.B)], tol):
        return eval_q(inst, x)
    return None


def strictly_feasible_point(n: int, eps: float = 0.125) -> LiftedPoint:
    """(e/2, ee^T/4 + eps I): every SDP-RLT inequality holds strictly for 0 < eps < 1/4."""
    if n < 1:
        raise InvalidInputError(f"dimension must be positive, got {n}")
    if not 0 < eps < 0.25:
        raise InvalidInputError(f"eps must lie in (0, 1/4), got {eps}")
    return LiftedPoint(np.full(n, 0.5), np.full((n, n), 0.25) + eps * np.eye(n))


def nullspace_certificate(p: LiftedPoint, block=None,
                          tol: float = DEFAULT_PSD_TOL) -> SdpRltCert:
    """SDP-RLT multipliers that make the lifted point p optimal.

    The bordered block is P block P^T, with P spanning the kernel of
    [[1, x^T], [x, X]]; all RLT multipliers are zero. Taking (Q, c) = (H, h)
    gives an instance whose SDP-RLT relaxation is solved by p (optimality
    only, not uniqueness).

    Raises:
        InvalidInputError: the lifted matrix has no kernel, or ``block`` has the
            wrong size or is not PSD.
    """
    gram = _lifted_gram(p)
    eigenvalues, vectors = eig_sym(gram)
    kernel = vectors[:, np.abs(eigenvalues) <= tol * scale_of(gram)]
    k = kernel.shape[1]
    if k == 0:
        raise InvalidInputError("[[1, x^T], [x, X]] is nonsingular; no nullspace certificate exists",
                                code="no_kernel")
    inner = np.eye(k) if block is None else as_sym_matrix(block, k)
    if not is_psd(inner, tol):
        raise InvalidInputError("nullspace block must be positive semidefinite")
    bordered = kernel @ inner @ kernel.T
    bordered = 0.5 * (bordered + bordered.T)
    return SdpRltCert(RltCert.zeros(p.n), bordered[0, 0], bordered[1:, 0], bordered[1:, 1:])
