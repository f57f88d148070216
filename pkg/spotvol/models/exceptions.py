from __future__ import annotations

class SpotVolError(Exception):
    """Base class for every error raised on purpose by spotvol."""
    exit_code = 1
    kind = "error"

class ValidationError(SpotVolError):
    """Raised when inputs, parameters or files are rejected."""
    exit_code = 2
    kind = "validation"

class NumericalFailure(SpotVolError):
    """Raised when a computation produces NaN, infinity or an unexpected complex residue."""
    exit_code = 3
    kind = "numerical"

class InvalidPricePath(ValidationError):
    def __init__(self, message: str):
        super().__init__(message)

class InvalidParameter(ValidationError):
    def __init__(self, name: str, value: object, requirement: str):
        self.name = name
        super().__init__(f"{name}={value!r} is invalid, {requirement}")

class InvalidGrid(ValidationError):
    def __init__(self, message: str):
        super().__init__(message)

class WindowOutOfRange(ValidationError):
    def __init__(self, start: float, end: float, horizon: float):
        super().__init__(
            f"window [{start:g}, {end:g}] s is not inside the sample [0, {horizon:g}] s"
        )

class UnsupportedModel(ValidationError):
    def __init__(self, model: str, choices: list[str]):
        super().__init__(f"unknown model {model!r}, expected one of {', '.join(choices)}")

class EmptySession(ValidationError):
    def __init__(self, message: str | None = None):
        super().__init__(message or "session contains no ticks")

class TickOrderError(ValidationError):
    def __init__(self, line: int):
        self.line = line
        super().__init__(f"timestamps are out of order at line {line}")

class MalformedTickData(ValidationError):
    def __init__(self, message: str):
        super().__init__(message)

class ConfigurationError(ValidationError):
    def __init__(self, message: str):
        super().__init__(message)

class OutputDirectoryError(ValidationError):
    def __init__(self, path: str, reason: str | None = None):
        if reason is None:
            return super().__init__(f"output directory {path!r} is not writable")
        return super().__init__(f"output directory {path!r} is not writable: {reason}")

class NonFiniteResult(NumericalFailure):
    def __init__(self, what: str):
        super().__init__(f"{what} contains NaN or infinite values")

class ImaginaryResidue(NumericalFailure):
    def __init__(self, residue: float, value: float):
        super().__init__(
            f"inverse sum has imaginary part {residue:.3e} against real part {value:.3e}"
        )
