"""Error taxonomy shared by every module.

Three families, matching the CLI exit-code contract:
usage/config problems (exit 1), data problems (exit 2), and
domain violations raised by the numerical operations (exit 1,
since they almost always trace back to a bad configuration value).
"""


class ChromacodeError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ChromacodeError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(ChromacodeError, ValueError):
    """A structured value violates its declared invariants."""


class DegeneratePupilError(DomainError):
    """Pupil carries no light (all-zero amplitude)."""


class DataError(ChromacodeError):
    """Missing, unreadable, or inconsistent input data (files, manifests)."""
