# src/edge_fabric/errors.py
from typing import Optional


class EdgeFabricError(Exception):
    """Root of every error raised by edge_fabric."""


class InputError(EdgeFabricError):
    """A problem with user-supplied input. The CLI maps these to exit code 2."""


class SpecSyntaxError(InputError):
    """Malformed JSON document."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class FieldError(InputError):
    """Missing, mistyped or unknown field. `path` looks like components[0].selectivity."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(InputError):
    """A parsed document violates a structural rule, e.g. NO_CLOUD."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class FormatError(InputError):
    """Bad row in a trace file."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OrderError(InputError):
    pass


class ConfigError(InputError):
    pass


class PlacementError(InputError):
    pass


class CapacityError(InputError):
    pass


class ShadowExists(InputError):
    pass


class PreconditionError(InputError):
    pass


class MissingMetric(InputError):
    pass


class EncodeError(EdgeFabricError):
    pass


class DecodeError(EdgeFabricError):
    def __init__(self, message: str, offset: Optional[int] = None):
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")
        self.offset = offset


class InternalInvariantViolation(EdgeFabricError):
    """Something the engine guarantees did not hold. The CLI maps this to exit code 1."""
