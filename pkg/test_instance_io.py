import json
from pathlib import Path

import numpy as np
import pytest

from forge import gen_exact_sdprlt, gen_inexact_rlt, gen_inexact_sdprlt_family
from instance_io import (dumps, instance_to_document, load_certificate, load_instance, load_report,
                         loads, save_certificate, save_instance, save_report, write_document)
from qp_errors import InstanceFileError
from qp_types import ExactnessLabel, ExactnessReport, ForgeSpec, LiftedPoint

GOLDEN = Path(__file__).parent / "golden" / "indefinite2_v1.json"


def write_json(path, document):
    path.write_text(json.dumps(document))
    return path


def test_golden_format_is_stable(indefinite2):
    assert dumps(instance_to_document(indefinite2)) == GOLDEN.read_text()


def test_golden_file_loads(indefinite2):
    inst, forged = load_instance(GOLDEN)
    assert forged is None
    assert inst.Q.tolist() == indefinite2.Q.tolist()
    assert inst.c.tolist() == indefinite2.c.tolist()


def test_forged_instance_survives_a_save(tmp_path):
    forged = gen_exact_sdprlt(4, [0.0, 0.1 + 0.2, 2.0 / 3.0, 1.0], ForgeSpec(seed=19, density=0.7))
    path = tmp_path / "inst.json"
    save_instance(path, forged)
    inst, restored = load_instance(path)
    assert inst.Q.tobytes() == forged.instance.Q.tobytes()
    assert inst.c.tobytes() == forged.instance.c.tobytes()
    assert restored.kind is forged.kind
    assert restored.spec == forged.spec
    assert restored.partition == forged.partition
    assert restored.sdprlt_cert.H.tobytes() == forged.sdprlt_cert.H.tobytes()
    assert restored.sdprlt_cert.beta == forged.sdprlt_cert.beta
    assert restored.designated_point.tolist() == forged.designated_point.tolist()


def test_inexact_rlt_metadata_keeps_certified_point(tmp_path):
    forged = gen_inexact_rlt(3, [1], L=[0], spec=ForgeSpec(seed=2))
    path = tmp_path / "inexact.json"
    save_instance(path, forged)
    _, restored = load_instance(path)
    assert restored.certified_point.X.tolist() == forged.certified_point.X.tolist()
    assert restored.notes == forged.notes


def test_family_metadata_keeps_witness(tmp_path):
    forged = gen_inexact_sdprlt_family(5)
    path = tmp_path / "family.json"
    save_instance(path, forged)
    _, restored = load_instance(path)
    assert restored.spec is None
    assert restored.witness.X.tolist() == forged.witness.X.tolist()
    assert json.loads(path.read_text())["metadata"]["seed"] is None


def test_symmetry_violation(tmp_path):
    path = write_json(tmp_path / "asym.json", {"format_version": "boxqp-forge/1", "n": 2,
                                               "Q": [[1.0, 2.0], [2.5, 1.0]], "c": [0.0, 0.0]})
    with pytest.raises(InstanceFileError) as err:
        load_instance(path)
    assert err.value.code == "symmetry_violation"
    assert "Q[1][2]" in str(err.value) or "Q[2][1]" in str(err.value)


def test_version_mismatch(tmp_path):
    path = write_json(tmp_path / "v2.json", {"format_version": "boxqp-forge/2", "n": 1,
                                             "Q": [[1.0]], "c": [0.0]})
    with pytest.raises(InstanceFileError) as err:
        load_instance(path)
    assert err.value.code == "version_mismatch"


def test_missing_fields(tmp_path):
    with pytest.raises(InstanceFileError) as err:
        load_instance(write_json(tmp_path / "a.json", {"n": 1, "Q": [[1.0]], "c": [0.0]}))
    assert err.value.code == "missing_field"
    with pytest.raises(InstanceFileError) as err:
        load_instance(write_json(tmp_path / "b.json", {"format_version": "boxqp-forge/1", "n": 1,
                                                       "Q": [[1.0]]}))
    assert err.value.code == "missing_field"


def test_dimension_mismatch(tmp_path):
    path = write_json(tmp_path / "dims.json", {"format_version": "boxqp-forge/1", "n": 2,
                                               "Q": [[1.0, 0.0], [0.0, 1.0]], "c": [0.0]})
    with pytest.raises(InstanceFileError) as err:
        load_instance(path)
    assert err.value.code == "dimension_mismatch"


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"format_version": "boxqp-forge/1", "n": ')
    with pytest.raises(InstanceFileError) as err:
        load_instance(path)
    assert err.value.code == "malformed_json"


def test_non_finite_numbers_rejected():
    with pytest.raises(InstanceFileError) as err:
        loads('{"format_version": "boxqp-forge/1", "n": 1, "Q": [[NaN]], "c": [0.0]}')
    assert err.value.code == "malformed_json"
    with pytest.raises(InstanceFileError):
        dumps({"value": float("inf")})
    with pytest.raises(InstanceFileError):
        loads("[1, 2]")


def test_unreadable_file(tmp_path):
    with pytest.raises(InstanceFileError) as err:
        load_instance(tmp_path / "missing.json")
    assert err.value.code == "unreadable_file"


def test_certificate_file(tmp_path):
    forged = gen_exact_sdprlt(3, [0.0, 0.5, 1.0], ForgeSpec(seed=1))
    path = tmp_path / "cert.json"
    save_certificate(path, "sdprlt", forged.sdprlt_cert, forged.certified_point)
    kind, cert, point = load_certificate(path)
    assert kind == "sdprlt"
    assert cert.to_dict() == forged.sdprlt_cert.to_dict()
    assert point.x.tolist() == forged.certified_point.x.tolist()


def test_certificate_without_point(tmp_path):
    forged = gen_inexact_rlt(3, [2], spec=ForgeSpec(seed=1))
    path = tmp_path / "rlt.json"
    save_certificate(path, "rlt", forged.rlt_cert)
    kind, cert, point = load_certificate(path)
    assert kind == "rlt" and point is None
    assert cert.W.tobytes() == forged.rlt_cert.W.tobytes()


def test_unknown_certificate_kind(tmp_path):
    path = write_json(tmp_path / "cert.json", {"format_version": "boxqp-forge/1",
                                               "certificate_kind": "sos", "multipliers": {}})
    with pytest.raises(InstanceFileError):
        load_certificate(path)


def test_certificate_with_text_entry(tmp_path):
    forged = gen_inexact_rlt(3, [2], spec=ForgeSpec(seed=1))
    path = tmp_path / "rlt.json"
    save_certificate(path, "rlt", forged.rlt_cert)
    document = json.loads(path.read_text())
    document["multipliers"]["u"][0] = "x"
    write_json(path, document)
    with pytest.raises(InstanceFileError) as err:
        load_certificate(path)
    assert err.value.code == "malformed_json"


def test_non_utf8_file(tmp_path):
    path = tmp_path / "binary.json"
    path.write_bytes(b'{"format_version": "boxqp-forge/1", "n": \xff}')
    with pytest.raises(InstanceFileError) as err:
        load_instance(path)
    assert err.value.code == "malformed_json"
    with pytest.raises(InstanceFileError):
        load_certificate(path)


def test_report_file(tmp_path):
    report = ExactnessReport(-0.5, -1.0 / 3.0, None, ExactnessLabel.PARTIAL, "SDP-RLT proven inexact",
                             -0.5, -0.375, ["witness_upper_bound"])
    path = tmp_path / "report.json"
    save_report(path, report)
    assert load_report(path) == report


def test_dash_writes_to_stdout(capsys):
    write_document("-", {"format_version": "boxqp-forge/1", "point": LiftedPoint.rank_one([0.5]).to_dict()})
    document = json.loads(capsys.readouterr().out)
    assert document["point"]["X"] == [[0.25]]


def test_float_repr_round_trips(tmp_path):
    values = np.array([0.1, 1.0 / 3.0, 2.0 ** -40, 123456.789e-300])
    Q = np.diag(values)
    path = tmp_path / "floats.json"
    write_document(path, {"format_version": "boxqp-forge/1", "n": 4, "Q": Q.tolist(), "c": values.tolist()})
    inst, _ = load_instance(path)
    assert inst.c.tobytes() == values.tobytes()
