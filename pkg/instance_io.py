"""JSON persistence for instances, certificates and reports.

Files carry ``"format_version": "boxqp-forge/1"``. Floats are written with
Python's shortest round-trip repr, so binary64 values survive a save/load
cycle bit for bit. A path of ``-`` means standard input or output.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from forge import ForgedInstance
from qp_errors import BoxQpError, InstanceFileError
from qp_types import BoxQpInstance, ExactnessReport, LiftedPoint, RltCert, SdpRltCert

FORMAT_VERSION = "boxqp-forge/1"
SYMMETRY_TOL = 1e-12
CERTIFICATE_KINDS = ("rlt", "sdprlt")

PathLike = Union[str, Path]


def dumps(document: Dict[str, Any]) -> str:
    try:
        return json.dumps(document, indent=2, allow_nan=False) + "\n"
    except ValueError as e:
        raise InstanceFileError(f"refusing to write non-finite numbers: {e}",
                                code="malformed_json") from e


def _reject_constant(name: str):
    raise InstanceFileError(f"non-finite number {name} in JSON input", code="malformed_json")


def loads(text: str) -> Dict[str, Any]:
    try:
        document = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise InstanceFileError(f"malformed JSON: {e}", code="malformed_json") from e
    if not isinstance(document, dict):
        raise InstanceFileError("top-level JSON value must be an object", code="malformed_json")
    return document


def read_document(path: PathLike) -> Dict[str, Any]:
    try:
        if str(path) == "-":
            return loads(sys.stdin.read())
        with open(path, 'r', encoding='utf-8') as f:
            return loads(f.read())
    except OSError as e:
        raise InstanceFileError(f"cannot read {path}: {e}", code="unreadable_file") from e
    except UnicodeDecodeError as e:
        raise InstanceFileError(f"{path} is not UTF-8 text: {e}", code="malformed_json") from e


def write_document(path: PathLike, document: Dict[str, Any]) -> None:
    text = dumps(document)
    if str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    logging.debug(f"Wrote {path}")


def _check_version(document: Dict[str, Any]) -> None:
    version = document.get("format_version")
    if version is None:
        raise InstanceFileError("missing format_version", code="missing_field")
    if version != FORMAT_VERSION:
        raise InstanceFileError(f"unsupported format_version {version!r}, expected {FORMAT_VERSION!r}",
                                code="version_mismatch")


def _field(document: Dict[str, Any], name: str) -> Any:
    if name not in document:
        raise InstanceFileError(f"missing field {name!r}", code="missing_field")
    return document[name]


def _numeric(value: Any, name: str, shape: Tuple[int, ...]) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise InstanceFileError(f"{name} must be numeric: {e}", code="dimension_mismatch") from e
    if arr.shape != shape:
        raise InstanceFileError(f"{name} has shape {arr.shape}, expected {shape}",
                                code="dimension_mismatch")
    if not np.all(np.isfinite(arr)):
        raise InstanceFileError(f"{name} contains non-finite values", code="malformed_json")
    return arr


def instance_to_document(inst: BoxQpInstance, forged: Optional[ForgedInstance] = None) -> Dict[str, Any]:
    document: Dict[str, Any] = {"format_version": FORMAT_VERSION}
    document.update(inst.to_dict())
    if forged is not None:
        document["metadata"] = forged.to_dict()
    return document


def instance_from_document(document: Dict[str, Any]) -> Tuple[BoxQpInstance, Optional[ForgedInstance]]:
    _check_version(document)
    n = _field(document, "n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceFileError(f"n must be a positive integer, got {n!r}", code="dimension_mismatch")
    Q = _numeric(_field(document, "Q"), "Q", (n, n))
    c = _numeric(_field(document, "c"), "c", (n,))
    asymmetry = float(np.max(np.abs(Q - Q.T)))
    if asymmetry > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(Q)))):
        i, j = np.unravel_index(int(np.argmax(np.abs(Q - Q.T))), Q.shape)
        raise InstanceFileError(
            f"Q is not symmetric: Q[{i + 1}][{j + 1}] = {Q[i, j]!r}, Q[{j + 1}][{i + 1}] = {Q[j, i]!r}",
            code="symmetry_violation")
    inst = BoxQpInstance(Q, c)

    metadata = document.get("metadata")
    if metadata is None:
        return inst, None
    try:
        forged = ForgedInstance.from_dict(inst, metadata)
    except KeyError as e:
        raise InstanceFileError(f"metadata is missing field {e}", code="missing_field") from e
    except BoxQpError as e:
        raise InstanceFileError(f"invalid metadata: {e}", code="dimension_mismatch") from e
    except (TypeError, ValueError) as e:
        raise InstanceFileError(f"invalid metadata: {e}", code="malformed_json") from e
    return inst, forged


def save_instance(path: PathLike, inst: Union[BoxQpInstance, ForgedInstance]) -> None:
    if isinstance(inst, ForgedInstance):
        write_document(path, instance_to_document(inst.instance, inst))
    else:
        write_document(path, instance_to_document(inst))


def load_instance(path: PathLike) -> Tuple[BoxQpInstance, Optional[ForgedInstance]]:
    return instance_from_document(read_document(path))


def certificate_to_document(kind: str, cert: Union[RltCert, SdpRltCert],
                            point: Optional[LiftedPoint] = None) -> Dict[str, Any]:
    if kind not in CERTIFICATE_KINDS:
        raise InstanceFileError(f"unknown certificate kind {kind!r}", code="malformed_json")
    document: Dict[str, Any] = {"format_version": FORMAT_VERSION, "certificate_kind": kind}
    if point is not None:
        document["point"] = point.to_dict()
    document["multipliers"] = cert.to_dict()
    return document


def certificate_from_document(document: Dict[str, Any]
                              ) -> Tuple[str, Union[RltCert, SdpRltCert], Optional[LiftedPoint]]:
    _check_version(document)
    kind = _field(document, "certificate_kind")
    if kind not in CERTIFICATE_KINDS:
        raise InstanceFileError(f"unknown certificate kind {kind!r}", code="malformed_json")
    multipliers = _field(document, "multipliers")
    try:
        cert = RltCert.from_dict(multipliers) if kind == "rlt" else SdpRltCert.from_dict(multipliers)
        point = LiftedPoint.from_dict(document["point"]) if "point" in document else None
    except KeyError as e:
        raise InstanceFileError(f"certificate is missing field {e}", code="missing_field") from e
    except BoxQpError as e:
        raise InstanceFileError(f"invalid certificate: {e}", code="dimension_mismatch") from e
    except (TypeError, ValueError) as e:
        raise InstanceFileError(f"certificate entries must be numbers: {e}", code="malformed_json") from e
    return kind, cert, point


def save_certificate(path: PathLike, kind: str, cert: Union[RltCert, SdpRltCert],
                     point: Optional[LiftedPoint] = None) -> None:
    write_document(path, certificate_to_document(kind, cert, point))


def load_certificate(path: PathLike) -> Tuple[str, Union[RltCert, SdpRltCert], Optional[LiftedPoint]]:
    return certificate_from_document(read_document(path))


def save_report(path: PathLike, report: ExactnessReport) -> None:
    document: Dict[str, Any] = {"format_version": FORMAT_VERSION}
    document.update(report.to_dict())
    write_document(path, document)


def load_report(path: PathLike) -> ExactnessReport:
    document = read_document(path)
    _check_version(document)
    try:
        return ExactnessReport.from_dict(document)
    except KeyError as e:
        raise InstanceFileError(f"report is missing field {e}", code="missing_field") from e
    except ValueError as e:
        raise InstanceFileError(f"invalid report: {e}", code="malformed_json") from e
