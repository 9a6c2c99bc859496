import numpy as np
import pytest

from qp_errors import InvalidInputError
from qp_types import (BoundViolation, BoxQpInstance, ConditionResidual, ExactnessLabel,
                      ExactnessReport, ForgeSpec, IndexPartition, LiftedPoint, RltCert,
                      SdpRltCert, VerificationReport, check_in_box, eval_q, partition_of)


def test_eval_q_on_example(indefinite2):
    assert eval_q(indefinite2, [0.0, 0.0]) == 0.0
    assert eval_q(indefinite2, [1.0, 1.0]) == 0.0
    assert eval_q(indefinite2, [0.5, 0.5]) == pytest.approx(0.5)


def test_eval_q_rejects_wrong_length(indefinite2):
    with pytest.raises(InvalidInputError):
        eval_q(indefinite2, [0.0, 0.0, 0.0])


def test_instance_is_symmetrised_and_read_only():
    inst = BoxQpInstance([[1.0, 2.0], [0.0, 1.0]], [0.0, 0.0])
    assert inst.Q.tolist() == [[1.0, 1.0], [1.0, 1.0]]
    with pytest.raises(ValueError):
        inst.Q[0, 0] = 5.0


def test_instance_dimension_mismatch():
    with pytest.raises(InvalidInputError) as err:
        BoxQpInstance(np.eye(2), [1.0, 2.0, 3.0])
    assert err.value.code == "dimension_mismatch"


def test_instance_scale(indefinite2):
    assert indefinite2.scale == 2.0
    assert BoxQpInstance(np.zeros((2, 2)), np.zeros(2)).scale == 1.0


def test_partition_of_examples():
    part = partition_of([0.0, 0.5, 1.0], 1e-9)
    assert (part.L, part.B, part.U) == ((0,), (1,), (2,))
    assert part.to_dict() == {"L": [1], "B": [2], "U": [3]}

    assert partition_of(np.zeros(4)).L == (0, 1, 2, 3)
    assert partition_of(np.zeros(4)).is_vertex

    snapped = partition_of([1e-12, 0.3], 1e-9)
    assert (snapped.L, snapped.B, snapped.U) == ((0,), (1,), ())


def test_partition_idempotent_under_snapping():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.choice([0.0, 1e-11, 0.37, 1.0 - 1e-11, 1.0], size=5)
        part = partition_of(x)
        snapped = np.array(x)
        snapped[list(part.L)] = 0.0
        snapped[list(part.U)] = 1.0
        assert partition_of(snapped) == part


def test_check_in_box_rejects_outside_points():
    with pytest.raises(InvalidInputError) as err:
        check_in_box([0.5, 1.1])
    assert err.value.code == "out_of_box"
    with pytest.raises(InvalidInputError):
        check_in_box([float("nan")])


def test_index_partition_validation():
    with pytest.raises(InvalidInputError):
        IndexPartition(3, (0,), (0,), (1, 2))
    with pytest.raises(InvalidInputError):
        IndexPartition(3, (0,), (), (1,))
    with pytest.raises(InvalidInputError):
        IndexPartition.from_sets(2, L=[5])


def test_index_partition_from_sets_and_vertex():
    part = IndexPartition.from_sets(4, L=[0, 2])
    assert part.U == (1, 3)
    assert part.vertex().tolist() == [0.0, 1.0, 0.0, 1.0]
    assert IndexPartition.from_dict(4, part.to_dict()) == part


def test_lifted_point_objective_matches_eval_q(indefinite2):
    x = [0.2, 0.9]
    assert LiftedPoint.rank_one(x).objective(indefinite2) == pytest.approx(eval_q(indefinite2, x))


def test_lifted_point_dimension_check(indefinite2):
    with pytest.raises(InvalidInputError):
        LiftedPoint.rank_one([0.5, 0.5, 0.5]).objective(indefinite2)


def test_bordered_layout():
    cert = SdpRltCert(RltCert.zeros(2), 3.0, [1.0, 2.0], [[4.0, 5.0], [5.0, 6.0]])
    assert cert.bordered().tolist() == [[3.0, 1.0, 2.0], [1.0, 4.0, 5.0], [2.0, 5.0, 6.0]]


def test_sdprlt_cert_dict_flattens_base():
    cert = SdpRltCert.zeros(2)
    data = cert.to_dict()
    assert set(data) == {"u", "v", "W", "Y", "Z", "beta", "h", "H"}
    restored = SdpRltCert.from_dict(data)
    assert restored.beta == 0.0 and restored.n == 2


def test_verification_report_verdict():
    report = VerificationReport("rlt", [ConditionResidual("u_nonneg", 0.0, 1e-8),
                                        ConditionResidual("slack_v", 1e-3, 1e-8)])
    assert not report.verified
    assert report.failed_conditions == ["slack_v"]
    assert report.residual("slack_v") == 1e-3
    with pytest.raises(KeyError):
        report.residual("slack_w")
    assert report.to_dict()["conditions"][1]["passed"] is False


def test_bound_violation_is_one_based():
    violation = BoundViolation("mccormick_upper", 0, 1, 0.05)
    assert violation.describe() == "mccormick_upper[1,2] violated by 5.000e-02"
    assert violation.to_dict()["j"] == 2


def test_exactness_report_dict():
    report = ExactnessReport(-0.25, 0.0, 0.0, ExactnessLabel.E2, "SDP-RLT exact, RLT inexact",
                             0.0, 0.0, ["dimension_at_most_two"])
    restored = ExactnessReport.from_dict(report.to_dict())
    assert restored == report


@pytest.mark.parametrize("kwargs", [
    {"seed": -1},
    {"seed": 2 ** 64},
    {"seed": 0, "magnitude": 0.0},
    {"seed": 0, "density": 0.0},
    {"seed": 0, "density": 1.5},
    {"seed": 0, "strict_floor": 0.0},
    {"seed": 0, "zero_psd_probability": 2.0},
])
def test_forge_spec_validation(kwargs):
    with pytest.raises(InvalidInputError):
        ForgeSpec(**kwargs)


def test_forge_spec_dict():
    spec = ForgeSpec(seed=3, density=0.5)
    assert ForgeSpec.from_dict(spec.to_dict()) == spec
