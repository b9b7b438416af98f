"""Exception types shared across the package.

Each class carries a short ``kind`` tag used by the CLI when it reports
errors as JSON on stderr.
"""


class CliffPertError(Exception):
    kind = "error"


class DimensionError(CliffPertError, ValueError):
    kind = "dimension"


class AngleRangeError(CliffPertError, ValueError):
    kind = "angle_range"


class PhaseAlgebraError(CliffPertError, AssertionError):
    """An evolved coefficient picked up an imaginary part."""

    kind = "phase_algebra"


class ResourceLimitError(CliffPertError, MemoryError):
    kind = "resource_limit"

    def __init__(self, message: str, gate_index: int | None = None):
        super().__init__(message)
        self.gate_index = gate_index


class NoiseParameterError(CliffPertError, ValueError):
    kind = "noise_parameter"


class GenerationError(CliffPertError, RuntimeError):
    kind = "generation_failure"


class SchemaError(CliffPertError, ValueError):
    kind = "schema"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
