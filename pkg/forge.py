"""Instance generators with known RLT / SDP-RLT exactness.

Each generator samples dual multipliers with a prescribed support and sign
pattern and assembles (Q, c) from them, so the multipliers double as an
optimality certificate for a known lifted point. All randomness comes from
a Philox counter-based generator keyed by ``ForgeSpec.seed``.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from numlin import as_vector, min_eigenvalue
from qp_errors import InvalidInputError
from qp_types import (BoxQpInstance, ForgeSpec, IndexPartition, LiftedPoint, RltCert,
                      SdpRltCert, check_in_box, partition_of)
from rlt import half_fractional_lift

INTERIOR_LOW = 0.05
INTERIOR_HIGH = 0.95


class ForgeKind(str, Enum):
    EXACT_RLT = "exact-rlt"
    INEXACT_RLT = "inexact-rlt"
    EXACT_SDPRLT = "exact-sdprlt"
    EXACT_SDPRLT_INEXACT_RLT = "exact-sdprlt-inexact-rlt"
    INEXACT_SDPRLT_FAMILY = "inexact-sdprlt-family"


@dataclass
class ForgedInstance:
    instance: BoxQpInstance
    kind: ForgeKind
    designated_point: np.ndarray
    partition: IndexPartition
    spec: Optional[ForgeSpec] = None
    rlt_cert: Optional[RltCert] = None
    sdprlt_cert: Optional[SdpRltCert] = None
    certified_point: Optional[LiftedPoint] = None
    witness: Optional[LiftedPoint] = None
    notes: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.instance.n

    def to_dict(self) -> Dict:
        """Metadata block of the instance file (Q and c are stored beside it)."""
        certificates: Dict = {}
        if self.certified_point is not None:
            certificates["point"] = self.certified_point.to_dict()
        if self.rlt_cert is not None:
            certificates["rlt"] = self.rlt_cert.to_dict()
        if self.sdprlt_cert is not None:
            certificates["sdprlt"] = self.sdprlt_cert.to_dict()
        return {
            "kind": self.kind.value,
            "designated_point": self.designated_point.tolist(),
            "partition": self.partition.to_dict(),
            "seed": None if self.spec is None else self.spec.seed,
            "spec": None if self.spec is None else self.spec.to_dict(),
            "certificates": certificates,
            "witnesses": [] if self.witness is None else [self.witness.to_dict()],
            "notes": list(self.notes),
        }

    @staticmethod
    def from_dict(instance: BoxQpInstance, data: Dict) -> 'ForgedInstance':
        certificates = data.get("certificates") or {}
        witnesses = data.get("witnesses") or []
        return ForgedInstance(
            instance=instance,
            kind=ForgeKind(data["kind"]),
            designated_point=np.array(data["designated_point"], dtype=float),
            partition=IndexPartition.from_dict(instance.n, data["partition"]),
            spec=None if data.get("spec") is None else ForgeSpec.from_dict(data["spec"]),
            rlt_cert=RltCert.from_dict(certificates["rlt"]) if "rlt" in certificates else None,
            sdprlt_cert=(SdpRltCert.from_dict(certificates["sdprlt"])
                         if "sdprlt" in certificates else None),
            certified_point=(LiftedPoint.from_dict(certificates["point"])
                             if "point" in certificates else None),
            witness=LiftedPoint.from_dict(witnesses[0]) if witnesses else None,
            notes=list(data.get("notes", [])),
        )


def _block_mask(n: int, rows: Iterable[int], cols: Iterable[int]) -> np.ndarray:
    mask = np.zeros((n, n), dtype=bool)
    mask[np.ix_(list(rows), list(cols))] = True
    return mask


def _index_mask(n: int, idx: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[list(idx)] = True
    return mask


def zero_supports(partition: IndexPartition, sdprlt: bool = False) -> Dict[str, np.ndarray]:
    """Entries each multiplier must leave at zero (True = forced zero).

    For a vertex partition (B empty) these are exactly the exact-RLT
    patterns; with B non-empty they are the inexact-RLT patterns. The
    SDP-RLT patterns additionally zero W and Z on B x B.
    """
    n = partition.n
    L, B, U = partition.L, partition.B, partition.U
    W = _block_mask(n, L, L) | _block_mask(n, L, B) | _block_mask(n, B, L)
    Z = _block_mask(n, B, U) | _block_mask(n, U, B) | _block_mask(n, U, U)
    if sdprlt:
        W |= _block_mask(n, B, B)
        Z |= _block_mask(n, B, B)
    return {
        "u": _index_mask(n, L + B),
        "v": _index_mask(n, B + U),
        "W": W,
        "Y": (_block_mask(n, L, B) | _block_mask(n, L, U)
              | _block_mask(n, B, B) | _block_mask(n, B, U)),
        "Z": Z,
    }


def _check_pattern(partition: IndexPartition, multipliers: RltCert, sdprlt: bool) -> None:
    supports = zero_supports(partition, sdprlt)
    for name, forced_zero in supports.items():
        arr = getattr(multipliers, name)
        if np.any(arr < 0):
            raise InvalidInputError(f"multiplier {name} has negative entries", code="invalid_multipliers")
        if np.any(arr[forced_zero] != 0):
            raise InvalidInputError(f"multiplier {name} is nonzero outside its allowed support",
                                    code="invalid_multipliers")


def assemble_rlt_instance(partition: IndexPartition, multipliers: RltCert,
                          k: Optional[int] = None) -> BoxQpInstance:
    """(Q, c) = (W - Y - Y^T + Z, -u + v - We + Y^T e) after validating the pattern.

    With B empty the result has an exact RLT relaxation at the vertex of the
    partition. With B non-empty, W_kk and Z_kk must be positive for some
    k in B (``k`` if given) and the RLT relaxation is inexact.
    """
    _check_pattern(partition, multipliers, sdprlt=False)
    if partition.B:
        candidates = partition.B if k is None else (k,)
        if k is not None and k not in partition.B:
            raise InvalidInputError(f"k = {k + 1} is not in B", code="invalid_partition")
        if not any(multipliers.W[j, j] > 0 and multipliers.Z[j, j] > 0 for j in candidates):
            raise InvalidInputError("W_kk and Z_kk must be positive for the fractional index k",
                                    code="invalid_multipliers")
    e = np.ones(partition.n)
    u, v, W, Y, Z = multipliers.u, multipliers.v, multipliers.W, multipliers.Y, multipliers.Z
    return BoxQpInstance(W - Y - Y.T + Z, -u + v - W @ e + Y.T @ e)


def assemble_sdprlt_instance(xhat, multipliers: RltCert, H, strict: bool = False,
                             tol: float = 1e-12) -> Tuple[BoxQpInstance, SdpRltCert]:
    """Instance and SDP-RLT certificate for xhat from (u, v, W, Y, Z) and a PSD H.

    h = -H xhat and beta = -h^T xhat.
    """
    point = check_in_box(xhat)
    partition = partition_of(point)
    _check_pattern(partition, multipliers, sdprlt=True)
    H = np.asarray(H, dtype=float)
    smallest = min_eigenvalue(H)
    if smallest < -tol * max(1.0, float(np.max(np.abs(H)))):
        raise InvalidInputError("H must be positive semidefinite", code="invalid_multipliers")
    if strict and smallest <= 0:
        raise InvalidInputError("H must be positive definite", code="invalid_multipliers")
    h = -H @ point
    beta = -float(h @ point)
    cert = SdpRltCert(multipliers, beta, h, H)
    return sdprlt_instance(cert), cert


def sdprlt_instance(cert: SdpRltCert) -> BoxQpInstance:
    """(Q, c) = (W - Y - Y^T + Z + H, -u + v - We + Y^T e + h)."""
    base = cert.base
    e = np.ones(cert.n)
    Q = base.W - base.Y - base.Y.T + base.Z + cert.H
    c = -base.u + base.v - base.W @ e + base.Y.T @ e + cert.h
    return BoxQpInstance(Q, c)


class InstanceForge:
    """Seeded sampler for the free parameters of the generators."""

    def __init__(self, spec: ForgeSpec):
        self.spec = spec
        self.rng = np.random.Generator(np.random.Philox(spec.seed))

    def nonneg(self, shape, forced_zero: np.ndarray, symmetric: bool = False) -> np.ndarray:
        """Uniform on [0, magnitude], kept with probability ``density``."""
        values = self.rng.uniform(0.0, self.spec.magnitude, size=shape)
        keep = self.rng.uniform(0.0, 1.0, size=shape) < self.spec.density
        values = np.where(keep, values, 0.0)
        if symmetric:
            values = 0.5 * (values + values.T)
        values[forced_zero] = 0.0
        return values

    def strict(self) -> float:
        """Uniform on [strict_floor, strict_floor + magnitude]."""
        floor = self.spec.strict_floor
        return float(self.rng.uniform(floor, floor + self.spec.magnitude))

    def multipliers(self, partition: IndexPartition, sdprlt: bool = False) -> RltCert:
        n = partition.n
        supports = zero_supports(partition, sdprlt)
        return RltCert(
            u=self.nonneg(n, supports["u"]),
            v=self.nonneg(n, supports["v"]),
            W=self.nonneg((n, n), supports["W"], symmetric=True),
            Y=self.nonneg((n, n), supports["Y"]),
            Z=self.nonneg((n, n), supports["Z"], symmetric=True),
        )

    def sample_psd(self, n: int, strict: bool) -> np.ndarray:
        """A^T A with A uniform on [-magnitude, magnitude]; plus strict_floor * I when strict."""
        mag = self.spec.magnitude
        A = self.rng.uniform(-mag, mag, size=(n, n))
        H = A.T @ A
        H = 0.5 * (H + H.T)
        if strict:
            H = H + self.spec.strict_floor * np.eye(n)
        return H

    def random_point(self, n: int, interior: bool = False,
                     require_fractional: bool = False) -> np.ndarray:
        """Designated point: each coordinate 0, 1 or in [0.05, 0.95] (always the latter if interior)."""
        values = self.rng.uniform(INTERIOR_LOW, INTERIOR_HIGH, size=n)
        if interior:
            return values
        category = self.rng.integers(0, 3, size=n)
        if require_fractional and not np.any(category == 1):
            category[int(self.rng.integers(0, n))] = 1
        return np.where(category == 0, 0.0, np.where(category == 2, 1.0, values))

    def random_subset(self, n: int) -> List[int]:
        return [int(j) for j in np.flatnonzero(self.rng.uniform(size=n) < 0.5)]


def sample_psd(n: int, spec: ForgeSpec, strict: bool = False) -> np.ndarray:
    return InstanceForge(spec).sample_psd(n, strict)


def _check_dimension(n: int, minimum: int = 1) -> None:
    if int(n) < minimum:
        raise InvalidInputError(f"n must be at least {minimum}, got {n}")


def gen_exact_rlt(n: int, L: Iterable[int], spec: ForgeSpec) -> ForgedInstance:
    """Instance whose RLT relaxation is exact at the vertex with zeros on L."""
    _check_dimension(n)
    partition = IndexPartition.from_sets(n, L=L)
    forge = InstanceForge(spec)
    cert = forge.multipliers(partition)
    instance = assemble_rlt_instance(partition, cert)
    vertex = partition.vertex()
    logging.info(f"Generated exact-rlt instance n={n} seed={spec.seed}")
    return ForgedInstance(instance, ForgeKind.EXACT_RLT, vertex, partition, spec,
                          rlt_cert=cert, certified_point=LiftedPoint.rank_one(vertex))


def gen_inexact_rlt(n: int, B: Iterable[int], L: Iterable[int] = (), k: Optional[int] = None,
                    spec: Optional[ForgeSpec] = None) -> ForgedInstance:
    """Instance whose RLT relaxation is inexact; every RLT optimum has x_k = 1/2."""
    _check_dimension(n)
    B = sorted(set(B))
    if not B:
        raise InvalidInputError("B must be non-empty", code="invalid_partition")
    partition = IndexPartition.from_sets(n, L=L, B=B)
    k = B[0] if k is None else int(k)
    if k not in partition.B:
        raise InvalidInputError(f"k = {k + 1} is not in B", code="invalid_partition")
    spec = spec if spec is not None else ForgeSpec(seed=0)

    forge = InstanceForge(spec)
    base = forge.multipliers(partition)
    W, Z = np.array(base.W), np.array(base.Z)
    W[k, k] = forge.strict()
    Z[k, k] = forge.strict()
    cert = RltCert(base.u, base.v, W, base.Y, Z)
    instance = assemble_rlt_instance(partition, cert, k)
    certified = half_fractional_lift(partition)
    logging.info(f"Generated inexact-rlt instance n={n} k={k + 1} seed={spec.seed}")
    return ForgedInstance(instance, ForgeKind.INEXACT_RLT, np.array(certified.x), partition, spec,
                          rlt_cert=cert, certified_point=certified,
                          notes=[f"fractional index k={k + 1}",
                                 "generator does not reach every instance with an inexact RLT relaxation"])


def _gen_sdprlt(n: int, xhat, spec: ForgeSpec, strict: bool) -> ForgedInstance:
    point = np.clip(check_in_box(as_vector(xhat, n)), 0.0, 1.0)
    partition = partition_of(point)
    forge = InstanceForge(spec)
    base = forge.multipliers(partition, sdprlt=True)
    zero_H = forge.rng.uniform() < spec.zero_psd_probability
    if strict or not zero_H:
        H = forge.sample_psd(n, strict)
    else:
        H = np.zeros((n, n))
    instance, cert = assemble_sdprlt_instance(point, base, H, strict=strict)
    kind = ForgeKind.EXACT_SDPRLT_INEXACT_RLT if strict else ForgeKind.EXACT_SDPRLT
    notes = []
    rlt_cert = None
    if strict:
        notes.append(f"H positive definite with lambda_min >= {spec.strict_floor}")
        notes.append("generator does not reach every instance with exact SDP-RLT and inexact RLT")
    elif not np.any(H) and partition.is_vertex:
        rlt_cert = base
        notes.append("H = 0 at a vertex: the RLT relaxation is exact as well")
    logging.info(f"Generated {kind.value} instance n={n} seed={spec.seed}")
    return ForgedInstance(instance, kind, point, partition, spec, rlt_cert=rlt_cert,
                          sdprlt_cert=cert, certified_point=LiftedPoint.rank_one(point), notes=notes)


def gen_exact_sdprlt(n: int, xhat, spec: ForgeSpec) -> ForgedInstance:
    """Instance whose SDP-RLT relaxation is exact with xhat a global minimizer."""
    _check_dimension(n)
    return _gen_sdprlt(n, xhat, spec, strict=False)


def gen_exact_sdprlt_inexact_rlt(n: int, xhat, spec: ForgeSpec) -> ForgedInstance:
    """Exact SDP-RLT, inexact RLT; xhat (not a vertex) is the unique global minimizer."""
    _check_dimension(n)
    if partition_of(as_vector(xhat, n)).is_vertex:
        raise InvalidInputError("designated point must not be a vertex", code="vertex_point")
    return _gen_sdprlt(n, xhat, spec, strict=True)


def family_values(n: int) -> Dict[str, float]:
    """Closed-form optimum and witness value of the concave family of size n."""
    m = n if n % 2 == 1 else n - 1
    k = (m - 1) // 2
    return {"global_value": 0.5 * (k * k / m - k), "witness_value": -m / 8.0}


def gen_inexact_sdprlt_family(n: int) -> ForgedInstance:
    """Q = ee^T/m - I, c = 0 on m = n (odd) or n - 1 (even, padded with a zero coordinate).

    The attached witness (e/2, X) is SDP-RLT feasible with objective -m/8,
    strictly below the global optimum (k^2/m - k)/2 with m = 2k + 1.
    """
    _check_dimension(n, 3)
    m = n if n % 2 == 1 else n - 1
    Q = np.zeros((n, n))
    Q[:m, :m] = np.full((m, m), 1.0 / m) - np.eye(m)
    x = np.zeros(n)
    x[:m] = 0.5
    a = 1.0 / (m - 1)
    X = np.zeros((n, n))
    X[:m, :m] = 0.25 * (1.0 + a) * np.eye(m) + 0.25 * (1.0 - a) * np.ones((m, m))
    witness = LiftedPoint(x, X)
    values = family_values(n)
    notes = [f"global_value={values['global_value']!r}", f"witness_value={values['witness_value']!r}"]
    if m != n:
        notes.append(f"padded from n={m} with a zero coordinate")
    logging.info(f"Generated inexact-sdprlt-family instance n={n}")
    return ForgedInstance(BoxQpInstance(Q, np.zeros(n)), ForgeKind.INEXACT_SDPRLT_FAMILY, x,
                          partition_of(x), None, witness=witness, notes=notes)
