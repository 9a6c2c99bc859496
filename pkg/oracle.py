"""Ground-truth oracles for small instances.

``solve_global`` enumerates the 3^n faces of the box. Pattern digits follow
the lattice numbering of ``rlt``: 0 fixes a coordinate at 0, 1 leaves it
free, 2 fixes it at 1. On each face the stationarity system
Q_BB x_B = -(c_B + Q_BU e_U) is solved; q is constant on the solution set,
so one in-box representative per face is enough.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from enumeration import DEFAULT_BLOCK_SIZE, map_blocks
from numlin import DEFAULT_PSD_TOL, is_psd, solve_min_norm
from qp_errors import DimensionCapError, InvalidInputError
from qp_types import BoxQpInstance, IndexPartition, check_in_box, eval_q, partition_of
from rlt import TIE_TOL, lattice_block

DEFAULT_INTERIOR_MARGIN = 1e-9
DEFAULT_GLOBAL_DIMENSION_CAP = 12
DEFAULT_GRID_DIMENSION_CAP = 4
FACE_ENUMERATION = "face-enumeration"
GRID = "grid"


@dataclass
class GlobalSolution:
    value: float
    argmin: np.ndarray
    method: str
    candidates_examined: int
    degenerate_faces: int = 0

    def to_dict(self) -> dict:
        return {"value": self.value, "argmin": self.argmin.tolist(), "method": self.method,
                "candidates_examined": self.candidates_examined,
                "degenerate_faces": self.degenerate_faces}


@dataclass
class FirstOrderReport:
    verified: bool
    gradient: np.ndarray
    u: np.ndarray
    v: np.ndarray
    partition: IndexPartition
    max_violation: float = 0.0

    def to_dict(self) -> dict:
        return {"verified": self.verified, "gradient": self.gradient.tolist(),
                "u": self.u.tolist(), "v": self.v.tolist(),
                "partition": self.partition.to_dict(), "max_violation": self.max_violation}


@dataclass
class _BlockResult:
    best: float
    candidates: List[Tuple[float, np.ndarray]] = field(default_factory=list)
    examined: int = 0
    degenerate: int = 0


def _interior(x: np.ndarray, margin: float) -> bool:
    return bool(np.all(x > margin) and np.all(x < 1.0 - margin))


def _kernel_line_search(x0: np.ndarray, kernel: np.ndarray, margin: float) -> Optional[np.ndarray]:
    """In-box point of x0 + span(kernel): the projection of the box centre, else one direction at a time."""
    centred = x0 + kernel @ (kernel.T @ (0.5 - x0))
    if _interior(centred, margin):
        return centred
    for col in range(kernel.shape[1]):
        d = kernel[:, col]
        moving = np.abs(d) > 1e-12
        if not _interior(x0[~moving], margin):
            continue
        a = (margin - x0[moving]) / d[moving]
        b = (1.0 - margin - x0[moving]) / d[moving]
        lo = float(np.max(np.minimum(a, b)))
        hi = float(np.min(np.maximum(a, b)))
        if lo < hi:
            candidate = x0 + 0.5 * (lo + hi) * d
            if _interior(candidate, margin):
                return candidate
    return None


def _face_representative(inst: BoxQpInstance, digits: np.ndarray, margin: float,
                         psd_tol: float) -> Tuple[Optional[np.ndarray], bool]:
    """In-box stationary point of one face, and whether the face was degenerate."""
    B = np.flatnonzero(digits == 1)
    U = np.flatnonzero(digits == 2)
    x = (digits == 2).astype(float)
    if B.size == 0:
        return x, False

    rhs = -(inst.c[B] + inst.Q[np.ix_(B, U)].sum(axis=1))
    solved = solve_min_norm(inst.Q[np.ix_(B, B)], rhs, psd_tol)
    if not solved.consistent:
        return None, False
    xb = solved.solution
    if not _interior(xb, margin):
        if solved.nullity == 0:
            return None, False
        xb = _kernel_line_search(xb, solved.kernel, margin)
        if xb is None:
            return None, solved.nullity >= 2
    x[B] = xb
    return x, False


def _pick(candidates: List[Tuple[float, np.ndarray]], scale: float) -> Tuple[float, np.ndarray]:
    """Lexicographically smallest point among those within the tie tolerance of the best."""
    best = min(value for value, _ in candidates)
    cutoff = best + TIE_TOL * max(scale, abs(best))
    tied = [(tuple(x), value, x) for value, x in candidates if value <= cutoff]
    _, value, x = min(tied, key=lambda item: item[0])
    return value, x


def _reduce(blocks: List[_BlockResult], scale: float) -> Tuple[float, np.ndarray]:
    best = min(b.best for b in blocks)
    cutoff = best + TIE_TOL * max(scale, abs(best))
    pool = [cand for b in blocks if b.best <= cutoff for cand in b.candidates]
    return _pick(pool, scale)


def solve_global(inst: BoxQpInstance, tol: float = DEFAULT_INTERIOR_MARGIN,
                 dimension_cap: int = DEFAULT_GLOBAL_DIMENSION_CAP,
                 workers: Optional[int] = None,
                 psd_tol: float = DEFAULT_PSD_TOL) -> GlobalSolution:
    """Global minimum of q over the box by face enumeration.

    Raises:
        DimensionCapError: n exceeds ``dimension_cap``.
    """
    n = inst.n
    if n > dimension_cap:
        raise DimensionCapError(f"face enumeration limited to n <= {dimension_cap}, got n = {n}")
    scale = inst.scale

    def scan(block: range) -> _BlockResult:
        patterns = (lattice_block(n, block) * 2.0).astype(np.int64)
        found = []
        degenerate = 0
        for digits in patterns:
            x, flagged = _face_representative(inst, digits, tol, psd_tol)
            if flagged:
                degenerate += 1
                logging.warning(f"Face with free set {[int(j) + 1 for j in np.flatnonzero(digits == 1)]} "
                                f"has a stationary set without an in-box representative")
            if x is not None:
                found.append((eval_q(inst, x), x))
        result = _BlockResult(best=min((v for v, _ in found), default=np.inf),
                              examined=len(found),
                              degenerate=degenerate)
        cutoff = result.best + TIE_TOL * max(scale, abs(result.best))
        result.candidates = [(v, x) for v, x in found if v <= cutoff]
        return result

    blocks = map_blocks(scan, 3 ** n, DEFAULT_BLOCK_SIZE, workers)
    value, argmin = _reduce(blocks, scale)
    examined = sum(b.examined for b in blocks)
    degenerate = sum(b.degenerate for b in blocks)
    logging.debug(f"Face enumeration over {3 ** n} faces: {examined} candidates, value {value:.12g}")
    return GlobalSolution(value, argmin, FACE_ENUMERATION, examined, degenerate)


def solve_grid(inst: BoxQpInstance, points_per_axis: int,
               dimension_cap: int = DEFAULT_GRID_DIMENSION_CAP,
               workers: Optional[int] = None) -> GlobalSolution:
    """Minimum of q over a uniform grid, an upper bound on the global minimum."""
    n = inst.n
    if n > dimension_cap:
        raise DimensionCapError(f"grid oracle limited to n <= {dimension_cap}, got n = {n}")
    k = int(points_per_axis)
    if k < 2:
        raise InvalidInputError(f"points_per_axis must be at least 2, got {points_per_axis}")
    if k % 2 == 0:
        logging.warning(f"Grid with {k} points per axis does not contain 1/2")
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    scale = inst.scale

    def scan(block: range) -> _BlockResult:
        idx = np.arange(block.start, block.stop, dtype=np.int64)
        points = ((idx[:, None] // powers[None, :]) % k) / (k - 1)
        values = 0.5 * np.einsum("ki,ij,kj->k", points, inst.Q, points) + points @ inst.c
        first = int(np.argmin(values))
        return _BlockResult(float(values[first]), [(float(values[first]), points[first])],
                            examined=len(idx))

    total = k ** n
    blocks = map_blocks(scan, total, DEFAULT_BLOCK_SIZE, workers)
    value, argmin = _reduce(blocks, scale)
    return GlobalSolution(value, argmin, GRID, total)


def check_first_order(inst: BoxQpInstance, x, tol: float = DEFAULT_PSD_TOL) -> FirstOrderReport:
    """KKT conditions at x with the unique multipliers u (on U) and v (on L).

    Sign and stationarity thresholds are tol * max(1, ||Q||_max, ||c||_max).
    """
    point = np.clip(check_in_box(x), 0.0, 1.0)
    if point.shape[0] != inst.n:
        raise InvalidInputError(f"point has length {point.shape[0]}, instance n = {inst.n}",
                                code="dimension_mismatch")
    part = partition_of(point)
    g = inst.Q @ point + inst.c
    u = np.zeros(inst.n)
    v = np.zeros(inst.n)
    u[list(part.U)] = -g[list(part.U)]
    v[list(part.L)] = g[list(part.L)]
    violation = max([0.0, float(np.max(-u)), float(np.max(-v))]
                    + [float(abs(g[j])) for j in part.B])
    verified = violation <= tol * inst.scale
    return FirstOrderReport(verified, g, u, v, part, violation)


def check_qbb_psd(inst: BoxQpInstance, x, tol: float = DEFAULT_PSD_TOL) -> bool:
    """Second-order necessary condition: Q restricted to the free coordinates is PSD."""
    part = partition_of(x)
    if part.is_vertex:
        return True
    return is_psd(inst.Q[np.ix_(part.B, part.B)], tol)
