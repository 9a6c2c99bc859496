"""Exception hierarchy shared by every boxqp-forge module.

Each error carries a stable ``code`` string (used in CLI error documents)
and the process ``exit_code`` the CLI returns for it.
"""


class BoxQpError(Exception):
    code = "error"
    exit_code = 3

    def __init__(self, message: str, code: str = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


class InvalidInputError(BoxQpError):
    """Bad shapes, out-of-box points, invalid index sets or parameters."""
    code = "invalid_input"
    exit_code = 2


class InstanceFileError(InvalidInputError):
    """Problems reading an instance or certificate file.

    Codes: malformed_json, version_mismatch, symmetry_violation,
    dimension_mismatch, missing_field.
    """
    code = "malformed_json"


class DimensionCapError(BoxQpError):
    code = "dimension_cap"
    exit_code = 3


class NumericalFailure(BoxQpError):
    code = "numerical_failure"
    exit_code = 3


class CertificateInvalidError(BoxQpError):
    code = "certificate_invalid"
    exit_code = 1


class InfeasibleWitnessError(BoxQpError):
    code = "infeasible_witness"
    exit_code = 1
