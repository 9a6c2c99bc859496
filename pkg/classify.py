"""Exactness classification of an instance into E1-E4.

E1: RLT value = SDP-RLT value = global value.
E2: RLT value < SDP-RLT value = global value.
E3: RLT value = SDP-RLT value < global value.
E4: RLT value < SDP-RLT value < global value.

RLT and global values are computed exactly by enumeration. The SDP-RLT
value is only known when some piece of evidence fixes it; otherwise the
report carries the interval it is known to lie in and the label is PARTIAL.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from numlin import is_psd
from oracle import DEFAULT_GLOBAL_DIMENSION_CAP, solve_global
from qp_errors import BoxQpError, NumericalFailure
from qp_types import (BoxQpInstance, ExactnessLabel, ExactnessReport, LiftedPoint, RltCert,
                      SdpRltCert)
from rlt import DEFAULT_CERT_TOL, DEFAULT_RLT_DIMENSION_CAP, rlt_dual_objective, solve_rlt, verify_rlt_cert
from sdprlt import pin_sdprlt_value, sdprlt_lower_bound_from_dual, sdprlt_upper_bound_from_witness

DEFAULT_EXACTNESS_TOL = 1e-7


@dataclass
class ClassificationHints:
    rlt_certificates: List[Tuple[LiftedPoint, RltCert]] = field(default_factory=list)
    sdprlt_certificates: List[Tuple[LiftedPoint, SdpRltCert]] = field(default_factory=list)
    witnesses: List[LiftedPoint] = field(default_factory=list)
    dual_points: List[SdpRltCert] = field(default_factory=list)


def hints_from_forged(forged) -> ClassificationHints:
    """Certificates and witnesses attached to a generated instance."""
    hints = ClassificationHints()
    point = forged.certified_point
    if point is None:
        point = LiftedPoint.rank_one(forged.designated_point)
    if forged.rlt_cert is not None:
        hints.rlt_certificates.append((point, forged.rlt_cert))
    if forged.sdprlt_cert is not None:
        hints.sdprlt_certificates.append((point, forged.sdprlt_cert))
    if forged.witness is not None:
        hints.witnesses.append(forged.witness)
    return hints


class _Interval:
    """What is known about the SDP-RLT value."""

    def __init__(self, lower: float, upper: float, eps: float):
        self.lower = lower
        self.upper = upper
        self.eps = eps
        self.pinned: Optional[float] = None

    def pin(self, value: float, source: str) -> None:
        if value < self.lower - self.eps or value > self.upper + self.eps:
            raise NumericalFailure(
                f"{source} gives SDP-RLT value {value:.12g} outside the known interval "
                f"[{self.lower:.12g}, {self.upper:.12g}]")
        if self.pinned is not None and abs(self.pinned - value) > self.eps:
            raise NumericalFailure(
                f"{source} gives SDP-RLT value {value:.12g}, already pinned at {self.pinned:.12g}")
        self.pinned = value
        self.lower = self.upper = value

    def raise_lower(self, value: float, source: str) -> None:
        if value > self.upper + self.eps:
            raise NumericalFailure(f"{source} lower bound {value:.12g} exceeds upper bound {self.upper:.12g}")
        self.lower = max(self.lower, value)

    def cap_upper(self, value: float, source: str) -> None:
        if value < self.lower - self.eps:
            raise NumericalFailure(f"{source} upper bound {value:.12g} is below lower bound {self.lower:.12g}")
        self.upper = min(self.upper, value)


def classify(inst: BoxQpInstance, hints: Optional[ClassificationHints] = None,
             tol: float = DEFAULT_EXACTNESS_TOL, cert_tol: float = DEFAULT_CERT_TOL,
             rlt_dimension_cap: int = DEFAULT_RLT_DIMENSION_CAP,
             global_dimension_cap: int = DEFAULT_GLOBAL_DIMENSION_CAP,
             workers: Optional[int] = None) -> ExactnessReport:
    """Label the instance E1-E4, or PARTIAL with the known SDP-RLT interval.

    Raises:
        DimensionCapError: n exceeds an enumeration cap.
        NumericalFailure: the collected evidence contradicts
            RLT value <= SDP-RLT value <= global value.
    """
    hints = hints or ClassificationHints()
    rlt_value = solve_rlt(inst, rlt_dimension_cap, workers).value
    global_value = solve_global(inst, dimension_cap=global_dimension_cap, workers=workers).value
    eps = tol * max(1.0, abs(global_value))
    if rlt_value > global_value + eps:
        raise NumericalFailure(f"RLT value {rlt_value:.12g} exceeds global value {global_value:.12g}")

    evidence: List[str] = []
    known = _Interval(rlt_value, global_value, eps)
    rlt_exact = abs(global_value - rlt_value) <= eps

    for point, cert in hints.rlt_certificates:
        if verify_rlt_cert(inst, point, cert, cert_tol).verified:
            dual = rlt_dual_objective(cert)
            if abs(dual - rlt_value) > eps:
                raise NumericalFailure(
                    f"verified RLT certificate has value {dual:.12g}, lattice scan {rlt_value:.12g}")
            evidence.append("rlt_certificate_verified")
        else:
            evidence.append("rlt_certificate_rejected")

    if rlt_exact:
        known.pin(global_value, "RLT exactness")
        evidence.append("rlt_exact_sandwich")
    if inst.n <= 2:
        known.pin(global_value, "dimension at most two")
        evidence.append("dimension_at_most_two")
    if is_psd(inst.Q):
        known.pin(global_value, "convex objective")
        evidence.append("convex_objective")

    for point, cert in hints.sdprlt_certificates:
        try:
            pinned = pin_sdprlt_value(inst, point, cert, cert_tol)
        except BoxQpError as err:
            logging.info(f"Ignoring SDP-RLT certificate: {err}")
            evidence.append("sdprlt_certificate_rejected")
            continue
        known.pin(pinned.value, "SDP-RLT certificate")
        evidence.append("pinned_by_certificate")

    for witness in hints.witnesses:
        try:
            bound = sdprlt_upper_bound_from_witness(inst, witness, cert_tol)
        except BoxQpError as err:
            logging.info(f"Ignoring witness: {err}")
            evidence.append("witness_rejected")
            continue
        known.cap_upper(bound, "witness")
        evidence.append("witness_upper_bound")

    for cert in hints.dual_points:
        try:
            bound = sdprlt_lower_bound_from_dual(inst, cert, cert_tol)
        except BoxQpError as err:
            logging.info(f"Ignoring SDP-RLT dual point: {err}")
            evidence.append("dual_point_rejected")
            continue
        known.raise_lower(bound, "dual point")
        evidence.append("dual_lower_bound")

    if known.pinned is None and known.upper - known.lower <= eps:
        known.pin(known.upper, "matching bounds")
        evidence.append("bounds_meet")

    label, detail = _label(rlt_value, global_value, known, rlt_exact, eps)
    return ExactnessReport(
        rlt_value=rlt_value,
        global_value=global_value,
        sdprlt_value=known.pinned,
        label=label,
        detail=detail,
        sdprlt_lower=known.lower,
        sdprlt_upper=known.upper,
        evidence=evidence,
    )


def _label(rlt_value: float, global_value: float, known: _Interval, rlt_exact: bool,
           eps: float) -> Tuple[ExactnessLabel, str]:
    if rlt_exact:
        return ExactnessLabel.E1, "RLT relaxation is exact"
    if known.pinned is not None:
        if abs(known.pinned - global_value) <= eps:
            return ExactnessLabel.E2, "SDP-RLT exact, RLT inexact"
        if abs(known.pinned - rlt_value) <= eps:
            return ExactnessLabel.E3, "SDP-RLT inexact and no stronger than RLT"
        return ExactnessLabel.E4, "SDP-RLT strictly between RLT and the global value"
    if known.upper < global_value - eps:
        if known.lower > rlt_value + eps:
            return ExactnessLabel.E4, "SDP-RLT proven inexact and strictly stronger than RLT"
        return (ExactnessLabel.PARTIAL,
                f"SDP-RLT proven inexact; value in [{known.lower!r}, {known.upper!r}], E3 or E4")
    return (ExactnessLabel.PARTIAL,
            f"RLT inexact; SDP-RLT value in [{known.lower!r}, {known.upper!r}], E2, E3 or E4")
