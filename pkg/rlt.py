"""RLT relaxation: the McCormick underestimator, its exact minimum, and certificates.

The minimum of the underestimator over the box is always attained on the
lattice {0, 1/2, 1}^n, so it is computed by scanning that lattice. Lattice
points are numbered base 3 with the first coordinate most significant and
digit d meaning coordinate d/2; index order is therefore the lexicographic
order 0 < 1/2 < 1 used for tie-breaking.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from enumeration import map_blocks
from numlin import as_vector, is_psd, max_norm, scale_of
from qp_errors import DimensionCapError, InvalidInputError
from qp_types import (BoundViolation, BoxQpInstance, ConditionResidual, IndexPartition,
                      LiftedPoint, MembershipResult, RltCert, VerificationReport,
                      check_in_box, partition_of)

DEFAULT_CERT_TOL = 1e-8
DEFAULT_RLT_DIMENSION_CAP = 12
TIE_TOL = 1e-12


@dataclass
class RltSolution:
    value: float
    argmin_x: np.ndarray
    argmin_X: np.ndarray
    lattice_minimizers: int

    @property
    def lifted(self) -> LiftedPoint:
        return LiftedPoint(self.argmin_x, self.argmin_X)

    def to_dict(self) -> dict:
        return {"value": self.value, "argmin_x": self.argmin_x.tolist(),
                "argmin_X": self.argmin_X.tolist(),
                "lattice_minimizers": self.lattice_minimizers}


@dataclass
class MDecomposition:
    """X = x x^T + M, with membership of M in the RLT and SDP-RLT slices."""
    M: np.ndarray
    in_rlt_slice: bool
    in_sdprlt_slice: bool


def lattice_block(n: int, block: range) -> np.ndarray:
    """Rows are the lattice points with indices in ``block``."""
    idx = np.arange(block.start, block.stop, dtype=np.int64)
    powers = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, None] // powers[None, :]) % 3
    return digits / 2.0


def _mccormick_bounds(points: np.ndarray):
    """Entrywise lower/upper McCormick bounds for a stack of points (m, n)."""
    lower = np.maximum(points[:, :, None] + points[:, None, :] - 1.0, 0.0)
    upper = np.minimum(points[:, :, None], points[:, None, :])
    return lower, upper


def ell_r_rows(inst: BoxQpInstance, points: np.ndarray) -> np.ndarray:
    """Underestimator values for each row of ``points`` (already in the box)."""
    lower, upper = _mccormick_bounds(points)
    positive = np.maximum(inst.Q, 0.0)
    negative = np.minimum(inst.Q, 0.0)
    quad = np.einsum("ij,kij->k", positive, lower) + np.einsum("ij,kij->k", negative, upper)
    return 0.5 * quad + points @ inst.c


def ell_r(inst: BoxQpInstance, x, tol: float = 1e-9) -> float:
    """Closed form of the RLT underestimator at x.

    Sums over every ordered pair (i, j), diagonal included: Q_ij > 0 takes
    max{0, x_i + x_j - 1}, Q_ij < 0 takes min{x_i, x_j}.
    """
    point = np.clip(check_in_box(as_vector(x, inst.n), tol), 0.0, 1.0)
    return float(ell_r_rows(inst, point[None, :])[0])


def rlt_lift(inst: BoxQpInstance, x) -> LiftedPoint:
    """Lifted point (x, X) attaining the underestimator at x.

    X_ij = min{x_i, x_j} where Q_ij < 0 and max{0, x_i + x_j - 1} elsewhere.
    """
    point = np.clip(check_in_box(as_vector(x, inst.n)), 0.0, 1.0)
    lower, upper = _mccormick_bounds(point[None, :])
    X = np.where(inst.Q < 0, upper[0], lower[0])
    return LiftedPoint(point, X)


def rlt_gap_at(inst: BoxQpInstance, x, tol: float = 1e-9) -> float:
    """1/2 min <Q, M> over the RLT slice at x, i.e. ell_r(x) - q(x)."""
    point = np.clip(check_in_box(as_vector(x, inst.n), tol), 0.0, 1.0)
    B = list(partition_of(point, tol).B)
    if not B:
        return 0.0
    xb = point[B]
    outer = np.outer(xb, xb)
    m_upper = np.minimum(xb[:, None], xb[None, :]) - outer
    m_lower = np.maximum(xb[:, None] + xb[None, :] - 1.0, 0.0) - outer
    Q_bb = inst.Q[np.ix_(B, B)]
    return float(0.5 * np.sum(np.where(Q_bb > 0, Q_bb * m_lower, Q_bb * m_upper)))


def underestimator_tight_at(inst: BoxQpInstance, x, tol: float = 1e-9) -> bool:
    """ell_r(x) = q(x) exactly when x is a vertex or Q_BB vanishes."""
    part = partition_of(x, tol)
    if part.is_vertex:
        return True
    Q_bb = inst.Q[np.ix_(part.B, part.B)]
    return max_norm(Q_bb) <= tol * inst.scale


def solve_rlt(inst: BoxQpInstance, dimension_cap: int = DEFAULT_RLT_DIMENSION_CAP,
              workers: Optional[int] = None) -> RltSolution:
    """Exact minimum of the RLT underestimator by scanning {0, 1/2, 1}^n."""
    n = inst.n
    if n > dimension_cap:
        raise DimensionCapError(
            f"RLT lattice scan limited to n <= {dimension_cap}, got n = {n}")
    total = 3 ** n

    def scan(block: range) -> np.ndarray:
        return ell_r_rows(inst, lattice_block(n, block))

    values = np.concatenate(map_blocks(scan, total, workers=workers))
    best = float(values.min())
    ties = np.flatnonzero(values <= best + TIE_TOL * max(inst.scale, abs(best)))
    first = int(ties[0])
    x = lattice_block(n, range(first, first + 1))[0]
    lifted = rlt_lift(inst, x)
    logging.debug(f"RLT lattice scan over {total} points: value {best:.12g}, "
                  f"{len(ties)} minimizer(s)")
    return RltSolution(value=float(values[first]), argmin_x=x,
                       argmin_X=np.array(lifted.X), lattice_minimizers=int(len(ties)))


def _vertices(n: int) -> np.ndarray:
    idx = np.arange(2 ** n, dtype=np.int64)
    powers = 2 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % 2).astype(float)


def vertex_rlt_optimal(inst: BoxQpInstance, v, tol: float = 1e-9) -> bool:
    """Whether vertex v minimises the RLT underestimator.

    By convexity it is enough to compare against the 2^n lattice points that
    stay on v's side of every coordinate: {0, 1/2} where v is 0 and
    {1/2, 1} where v is 1.
    """
    part = partition_of(v)
    if not part.is_vertex:
        raise InvalidInputError(f"{as_vector(v).tolist()} is not a vertex of the box",
                                code="not_a_vertex")
    vertex = part.vertex()
    neighbours = np.where(vertex[None, :] > 0.5, 1.0, 0.0) \
        + np.where(vertex[None, :] > 0.5, -0.5, 0.5) * _vertices(inst.n)
    at_vertex = float(ell_r_rows(inst, vertex[None, :])[0])
    best = float(ell_r_rows(inst, neighbours).min())
    return at_vertex <= best + tol * max(inst.scale, abs(best))


def rlt_optimal_vertices(inst: BoxQpInstance, tol: float = 1e-9,
                         dimension_cap: int = DEFAULT_RLT_DIMENSION_CAP,
                         workers: Optional[int] = None) -> List[np.ndarray]:
    """All vertices attaining the RLT optimum; non-empty iff the relaxation is exact."""
    value = solve_rlt(inst, dimension_cap, workers).value
    vertices = _vertices(inst.n)
    values = ell_r_rows(inst, vertices)
    hits = np.flatnonzero(values <= value + tol * max(inst.scale, abs(value)))
    return [vertices[i] for i in hits]


def half_fractional_lift(partition: IndexPartition) -> LiftedPoint:
    """x = 1/2 on B and 1 on U; X = 1/2 on B x U, 1 on U x U, 0 elsewhere."""
    n = partition.n
    B, U = list(partition.B), list(partition.U)
    x = np.zeros(n)
    x[B] = 0.5
    x[U] = 1.0
    X = np.zeros((n, n))
    X[np.ix_(B, U)] = 0.5
    X[np.ix_(U, B)] = 0.5
    X[np.ix_(U, U)] = 1.0
    return LiftedPoint(x, X)


def check_fr_membership(n: int, p: LiftedPoint, tol: float = DEFAULT_CERT_TOL) -> MembershipResult:
    """Box bounds on x and McCormick bounds on every X_ij, diagonal included."""
    if p.n != n:
        raise InvalidInputError(f"lifted point has dimension {p.n}, expected {n}",
                                code="dimension_mismatch")
    x, X = p.x, p.X
    violations = []
    for i in np.flatnonzero(x < -tol):
        violations.append(BoundViolation("x_lower", int(i), None, float(-x[i])))
    for i in np.flatnonzero(x > 1.0 + tol):
        violations.append(BoundViolation("x_upper", int(i), None, float(x[i] - 1.0)))
    lower, upper = _mccormick_bounds(x[None, :])
    below = lower[0] - X
    above = X - upper[0]
    for i, j in zip(*np.nonzero(np.triu(below > tol))):
        violations.append(BoundViolation("mccormick_lower", int(i), int(j), float(below[i, j])))
    for i, j in zip(*np.nonzero(np.triu(above > tol))):
        violations.append(BoundViolation("mccormick_upper", int(i), int(j), float(above[i, j])))
    return MembershipResult(not violations, violations)


def decompose_m(x, X, tol: float = DEFAULT_CERT_TOL) -> MDecomposition:
    """Split X = x x^T + M and test M against the slice bounds at x."""
    point = check_in_box(x)
    lifted = LiftedPoint(point, X)
    M = np.array(lifted.X) - np.outer(point, point)
    B = list(partition_of(point).B)
    outside = np.ones(M.shape, dtype=bool)
    outside[np.ix_(B, B)] = False
    in_rlt = bool(np.all(np.abs(M[outside]) <= tol))
    if in_rlt and B:
        xb = point[B]
        outer = np.outer(xb, xb)
        m_upper = np.minimum(xb[:, None], xb[None, :]) - outer
        m_lower = np.maximum(xb[:, None] + xb[None, :] - 1.0, 0.0) - outer
        M_bb = M[np.ix_(B, B)]
        in_rlt = bool(np.all(M_bb <= m_upper + tol) and np.all(M_bb >= m_lower - tol))
    in_sdprlt = in_rlt and is_psd(M, tol)
    return MDecomposition(M, in_rlt, in_sdprlt)


def rlt_dual_objective(cert: RltCert) -> float:
    """-e^T u - 1/2 e^T W e."""
    return float(-np.sum(cert.u) - 0.5 * np.sum(cert.W))


def _nonneg(name: str, arr: np.ndarray, tol: float) -> ConditionResidual:
    return ConditionResidual(name, max(0.0, -float(np.min(arr))), tol * scale_of(arr))


def _slack(name: str, multiplier: np.ndarray, gap: np.ndarray, tol: float) -> ConditionResidual:
    residual = abs(float(np.sum(multiplier * gap)))
    return ConditionResidual(name, residual, tol * max(1.0, max_norm(multiplier) * max_norm(gap)))


def rlt_dual_conditions(Q_target: np.ndarray, c_target: np.ndarray, cert: RltCert,
                        tol: float) -> List[ConditionResidual]:
    """Linear equations and sign conditions of the RLT dual.

    ``Q_target``/``c_target`` are what (u, v, W, Y, Z) must reproduce; the
    SDP-RLT checks pass Q - H and c - h.
    """
    n = cert.n
    e = np.ones(n)
    u, v, W, Y, Z = cert.u, cert.v, cert.W, cert.Y, cert.Z
    q_residual = max_norm(Q_target - (W - Y - Y.T + Z))
    c_residual = max_norm(c_target - (-u + v - W @ e + Y.T @ e))
    return [
        ConditionResidual("q_decomposition", q_residual, tol * scale_of(Q_target, W, Y, Z)),
        ConditionResidual("c_decomposition", c_residual,
                          tol * max(scale_of(c_target, u, v), n * max_norm(W), n * max_norm(Y))),
        _nonneg("u_nonneg", u, tol),
        _nonneg("v_nonneg", v, tol),
        _nonneg("w_nonneg", W, tol),
        _nonneg("y_nonneg", Y, tol),
        _nonneg("z_nonneg", Z, tol),
    ]


def rlt_slackness_conditions(p: LiftedPoint, cert: RltCert, tol: float) -> List[ConditionResidual]:
    e = np.ones(cert.n)
    x, X = p.x, p.X
    return [
        _slack("slack_u", cert.u, e - x, tol),
        _slack("slack_v", cert.v, x, tol),
        _slack("slack_w", cert.W, X - np.outer(x, e) - np.outer(e, x) + 1.0, tol),
        _slack("slack_y", cert.Y, np.outer(e, x) - X, tol),
        _slack("slack_z", cert.Z, X, tol),
    ]


def verify_rlt_cert(inst: BoxQpInstance, p: LiftedPoint, cert: RltCert,
                    tol: float = DEFAULT_CERT_TOL) -> VerificationReport:
    """Check that (p, cert) is a primal-dual optimal pair of the RLT relaxation."""
    if p.n != inst.n or cert.n != inst.n:
        raise InvalidInputError(
            f"instance has n = {inst.n}, point {p.n}, certificate {cert.n}",
            code="dimension_mismatch")
    conditions = rlt_dual_conditions(inst.Q, inst.c, cert, tol) + rlt_slackness_conditions(p, cert, tol)
    membership = check_fr_membership(inst.n, p, tol)
    conditions.append(ConditionResidual("primal_feasible", membership.worst, tol))
    report = VerificationReport("rlt", conditions, membership.violations)
    if not report.verified:
        logging.info(f"RLT certificate rejected: {', '.join(report.failed_conditions)}")
    return report

