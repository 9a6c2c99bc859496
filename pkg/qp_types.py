"""Value types shared by all boxqp-forge modules.

Indices are 0-based in memory and 1-based in every ``to_dict`` form.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from numlin import as_matrix, as_sym_matrix, as_vector, scale_of
from qp_errors import InvalidInputError

DEFAULT_PARTITION_TOL = 1e-9
SEED_LIMIT = 2 ** 64


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoxQpInstance:
    """q(x) = 1/2 x^T Q x + c^T x over the unit box [0, 1]^n."""
    Q: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        Q = as_sym_matrix(self.Q)
        c = as_vector(self.c)
        if c.shape[0] != Q.shape[0]:
            raise InvalidInputError(
                f"Q is {Q.shape[0]}x{Q.shape[0]} but c has length {c.shape[0]}",
                code="dimension_mismatch")
        object.__setattr__(self, "Q", _frozen(Q))
        object.__setattr__(self, "c", _frozen(c))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def scale(self) -> float:
        return scale_of(self.Q, self.c)

    def to_dict(self) -> dict:
        return {"n": self.n, "Q": self.Q.tolist(), "c": self.c.tolist()}

    @staticmethod
    def from_dict(data: dict) -> 'BoxQpInstance':
        return BoxQpInstance(Q=data["Q"], c=data["c"])


def eval_q(inst: BoxQpInstance, x) -> float:
    point = as_vector(x, inst.n)
    return float(0.5 * point @ inst.Q @ point + inst.c @ point)


def check_in_box(x, tol: float = DEFAULT_PARTITION_TOL) -> np.ndarray:
    point = as_vector(x)
    if np.any(point < -tol) or np.any(point > 1.0 + tol) or not np.all(np.isfinite(point)):
        raise InvalidInputError(f"point {point.tolist()} lies outside the unit box",
                                code="out_of_box")
    return point


@dataclass(frozen=True)
class IndexPartition:
    """Disjoint (L, B, U): coordinates at 0, strictly inside, and at 1."""
    n: int
    L: Tuple[int, ...]
    B: Tuple[int, ...]
    U: Tuple[int, ...]

    def __post_init__(self):
        L, B, U = (tuple(sorted(int(i) for i in s)) for s in (self.L, self.B, self.U))
        everything = L + B + U
        if len(set(everything)) != len(everything):
            raise InvalidInputError("index sets L, B, U must be pairwise disjoint",
                                    code="invalid_partition")
        if sorted(everything) != list(range(self.n)):
            raise InvalidInputError(f"index sets must cover 1..{self.n} exactly",
                                    code="invalid_partition")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "U", U)

    @classmethod
    def from_sets(cls, n: int, L=(), B=()) -> 'IndexPartition':
        """U is the complement of L and B."""
        L, B = set(L), set(B)
        for i in L | B:
            if not 0 <= i < n:
                raise InvalidInputError(f"index {i + 1} outside 1..{n}", code="invalid_partition")
        if L & B:
            raise InvalidInputError("L and B overlap", code="invalid_partition")
        U = set(range(n)) - L - B
        return cls(n, tuple(L), tuple(B), tuple(U))

    @classmethod
    def from_point(cls, x, tol: float = DEFAULT_PARTITION_TOL) -> 'IndexPartition':
        return partition_of(x, tol)

    @property
    def is_vertex(self) -> bool:
        return not self.B

    def vertex(self) -> np.ndarray:
        """0 on L, 1 on U (and 0 on B, which is empty for a vertex)."""
        point = np.zeros(self.n)
        point[list(self.U)] = 1.0
        return point

    def to_dict(self) -> dict:
        return {"L": [i + 1 for i in self.L],
                "B": [i + 1 for i in self.B],
                "U": [i + 1 for i in self.U]}

    @staticmethod
    def from_dict(n: int, data: dict) -> 'IndexPartition':
        return IndexPartition(n, tuple(i - 1 for i in data["L"]),
                              tuple(i - 1 for i in data["B"]),
                              tuple(i - 1 for i in data["U"]))


def partition_of(x, tol: float = DEFAULT_PARTITION_TOL) -> IndexPartition:
    point = check_in_box(x, tol)
    L = tuple(int(j) for j in np.flatnonzero(point <= tol))
    U = tuple(int(j) for j in np.flatnonzero(point >= 1.0 - tol))
    B = tuple(j for j in range(point.shape[0]) if j not in L and j not in U)
    return IndexPartition(point.shape[0], L, B, U)


@dataclass(frozen=True)
class LiftedPoint:
    """(x, X) in the lifted space of the relaxations."""
    x: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        x = as_vector(self.x)
        X = as_sym_matrix(self.X, x.shape[0])
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "X", _frozen(X))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @classmethod
    def rank_one(cls, x) -> 'LiftedPoint':
        point = as_vector(x)
        return cls(point, np.outer(point, point))

    def objective(self, inst: BoxQpInstance) -> float:
        """1/2 <Q, X> + c^T x."""
        if inst.n != self.n:
            raise InvalidInputError(f"lifted point has dimension {self.n}, instance {inst.n}",
                                    code="dimension_mismatch")
        return float(0.5 * np.sum(inst.Q * self.X) + inst.c @ self.x)

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "X": self.X.tolist()}

    @staticmethod
    def from_dict(data: dict) -> 'LiftedPoint':
        return LiftedPoint(data["x"], data["X"])


@dataclass(frozen=True)
class RltCert:
    """Multipliers (u, v, W, Y, Z) of the RLT dual.

    Signs are checked by the verifiers, not here, so tampered certificates
    can still be represented.
    """
    u: np.ndarray
    v: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        u = as_vector(self.u)
        n = u.shape[0]
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "v", _frozen(as_vector(self.v, n)))
        object.__setattr__(self, "W", _frozen(as_sym_matrix(self.W, n)))
        object.__setattr__(self, "Y", _frozen(as_matrix(self.Y, n, n)))
        object.__setattr__(self, "Z", _frozen(as_sym_matrix(self.Z, n)))

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @classmethod
    def zeros(cls, n: int) -> 'RltCert':
        return cls(np.zeros(n), np.zeros(n), np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n)))

    def to_dict(self) -> dict:
        return {"u": self.u.tolist(), "v": self.v.tolist(), "W": self.W.tolist(),
                "Y": self.Y.tolist(), "Z": self.Z.tolist()}

    @staticmethod
    def from_dict(data: dict) -> 'RltCert':
        return RltCert(data["u"], data["v"], data["W"], data["Y"], data["Z"])


@dataclass(frozen=True)
class SdpRltCert:
    """RLT multipliers plus the bordered PSD block [[beta, h^T], [h, H]]."""
    base: RltCert
    beta: float
    h: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        n = self.base.n
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "h", _frozen(as_vector(self.h, n)))
        object.__setattr__(self, "H", _frozen(as_sym_matrix(self.H, n)))

    @property
    def n(self) -> int:
        return self.base.n

    @classmethod
    def zeros(cls, n: int) -> 'SdpRltCert':
        return cls(RltCert.zeros(n), 0.0, np.zeros(n), np.zeros((n, n)))

    def bordered(self) -> np.ndarray:
        n = self.n
        block = np.empty((n + 1, n + 1))
        block[0, 0] = self.beta
        block[0, 1:] = self.h
        block[1:, 0] = self.h
        block[1:, 1:] = self.H
        return block

    def to_dict(self) -> dict:
        data = self.base.to_dict()
        data.update({"beta": self.beta, "h": self.h.tolist(), "H": self.H.tolist()})
        return data

    @staticmethod
    def from_dict(data: dict) -> 'SdpRltCert':
        return SdpRltCert(RltCert.from_dict(data), data["beta"], data["h"], data["H"])


@dataclass
class BoundViolation:
    """One violated box, McCormick or PSD bound of a lifted point."""
    kind: str
    i: Optional[int]
    j: Optional[int]
    magnitude: float

    def describe(self) -> str:
        where = ""
        if self.i is not None:
            where = f"[{self.i + 1}]" if self.j is None else f"[{self.i + 1},{self.j + 1}]"
        return f"{self.kind}{where} violated by {self.magnitude:.3e}"

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "i": None if self.i is None else self.i + 1,
                "j": None if self.j is None else self.j + 1,
                "magnitude": self.magnitude}


@dataclass
class MembershipResult:
    member: bool
    violations: List[BoundViolation] = field(default_factory=list)

    @property
    def worst(self) -> float:
        return max((v.magnitude for v in self.violations), default=0.0)

    def to_dict(self) -> dict:
        return {"member": self.member, "violations": [v.to_dict() for v in self.violations]}


@dataclass
class ConditionResidual:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual,
                "threshold": self.threshold, "passed": self.passed}


@dataclass
class VerificationReport:
    """Verdict of a certificate check with one residual per optimality condition."""
    certificate_kind: str
    conditions: List[ConditionResidual]
    violations: List[BoundViolation] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(cond.passed for cond in self.conditions)

    @property
    def failed_conditions(self) -> List[str]:
        return [cond.name for cond in self.conditions if not cond.passed]

    def residual(self, name: str) -> float:
        for cond in self.conditions:
            if cond.name == name:
                return cond.residual
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "certificate_kind": self.certificate_kind,
            "verified": self.verified,
            "failed_conditions": self.failed_conditions,
            "conditions": [cond.to_dict() for cond in self.conditions],
            "violations": [v.to_dict() for v in self.violations],
        }


class ExactnessLabel(str, Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    E4 = "E4"
    PARTIAL = "PARTIAL"


@dataclass
class ExactnessReport:
    rlt_value: float
    global_value: Optional[float]
    sdprlt_value: Optional[float]
    label: ExactnessLabel
    detail: str = ""
    sdprlt_lower: Optional[float] = None
    sdprlt_upper: Optional[float] = None
    evidence: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "detail": self.detail,
            "rlt_value": self.rlt_value,
            "global_value": self.global_value,
            "sdprlt_value": self.sdprlt_value,
            "sdprlt_lower": self.sdprlt_lower,
            "sdprlt_upper": self.sdprlt_upper,
            "evidence": list(self.evidence),
        }

    @staticmethod
    def from_dict(data: dict) -> 'ExactnessReport':
        return ExactnessReport(
            rlt_value=data["rlt_value"],
            global_value=data.get("global_value"),
            sdprlt_value=data.get("sdprlt_value"),
            label=ExactnessLabel(data["label"]),
            detail=data.get("detail", ""),
            sdprlt_lower=data.get("sdprlt_lower"),
            sdprlt_upper=data.get("sdprlt_upper"),
            evidence=list(data.get("evidence", [])),
        )


@dataclass(frozen=True)
class ForgeSpec:
    """Sampling parameters for the instance generators."""
    seed: int
    magnitude: float = 1.0
    density: float = 1.0
    strict_floor: float = 0.1
    zero_psd_probability: float = 0.0

    def __post_init__(self):
        if not 0 <= int(self.seed) < SEED_LIMIT:
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.magnitude > 0:
            raise InvalidInputError(f"magnitude must be positive, got {self.magnitude}")
        if not 0 < self.density <= 1:
            raise InvalidInputError(f"density must lie in (0, 1], got {self.density}")
        if not self.strict_floor > 0:
            raise InvalidInputError(f"strict_floor must be positive, got {self.strict_floor}")
        if not 0 <= self.zero_psd_probability <= 1:
            raise InvalidInputError(
                f"zero_psd_probability must lie in [0, 1], got {self.zero_psd_probability}")
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> Dict[str, float]:
        return {"seed": self.seed, "magnitude": self.magnitude, "density": self.density,
                "strict_floor": self.strict_floor,
                "zero_psd_probability": self.zero_psd_probability}

    @staticmethod
    def from_dict(data: dict) -> 'ForgeSpec':
        return ForgeSpec(seed=data["seed"],
                         magnitude=data.get("magnitude", 1.0),
                         density=data.get("density", 1.0),
                         strict_floor=data.get("strict_floor", 0.1),
                         zero_psd_probability=data.get("zero_psd_probability", 0.0))
