"""Error taxonomy shared across the package.

Every raised condition maps to one of these classes so the CLI can hand
back a distinct exit code per failure family.
"""


class SatjamError(Exception):
    """Base class for all package errors."""


class ConfigError(SatjamError, ValueError):
    """A configuration value violates a documented constraint."""


class ShapeError(SatjamError, ValueError):
    """An array argument has the wrong shape or length."""


class DomainError(SatjamError, ValueError):
    """A numeric argument is outside its valid domain."""


class TrainingError(SatjamError, RuntimeError):
    """Training cannot proceed (e.g. a class is missing from the labels)."""


class FormatError(SatjamError, ValueError):
    """A serialized file is malformed. Carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
