"""Exception hierarchy.

Each leaf carries a machine-readable ``code`` and maps onto one CLI exit code.
"""

from __future__ import annotations


class BiasBoundError(Exception):
    code = "error"
    exit_code = 1


class InputError(BiasBoundError):
    """Malformed or invalid input (exit code 1)."""

    code = "input_error"
    exit_code = 1

    def __init__(self, message: str, *, code: str | None = None,
                 line: int | None = None, field: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.line = line
        self.field = field

    def to_dict(self) -> dict:
        out = {"code": self.code, "message": str(self)}
        if self.line is not None:
            out["line"] = self.line
        if self.field is not None:
            out["field"] = self.field
        return out


class ParseError(InputError):
    code = "parse_error"


class ValidationError(InputError, ValueError):
    code = "validation_error"


class UsageError(InputError):
    code = "usage_error"


class UndefinedQuantityError(BiasBoundError, ArithmeticError):
    """A requested measure is undefined for the given table (exit code 2)."""

    code = "undefined_quantity"
    exit_code = 2


class ZeroCellError(UndefinedQuantityError):
    code = "zero_cell"

    def __init__(self, cell: str, quantity: str = "odds ratio"):
        super().__init__(f"{quantity} undefined: cell {cell} is zero")
        self.cell = cell


class BoundaryError(UndefinedQuantityError):
    code = "boundary_probability"

    def __init__(self, cell: str, value: float):
        super().__init__(
            f"selection probability {cell}={value!r} is on the boundary; "
            "odds-scale quantities need values strictly inside (0, 1)")
        self.cell = cell
        self.value = value


class EmptySelectionError(UndefinedQuantityError):
    code = "empty_selection"


class DegenerateSampleError(UndefinedQuantityError):
    code = "degenerate_sample"


class SamplerExhaustedError(BiasBoundError, RuntimeError):
    code = "sampler_exhausted"
    exit_code = 2


class VerificationFailure(BiasBoundError):
    """The oracle found a model that violates a claimed bound (exit code 3)."""

    code = "verification_failure"
    exit_code = 3


class InternalConsistencyError(BiasBoundError, AssertionError):
    """A verdict contradicted the exact decomposition. Signals a bug."""

    code = "internal_consistency"
    exit_code = 3
