"""Exception hierarchy shared by all modules.

The CLI maps :class:`SchemaError` to exit code 2 and every other
:class:`TDSError` to exit code 3.
"""

from __future__ import annotations


class TDSError(Exception):
    """Base class for domain errors raised by the kernel."""


class ParseError(TDSError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DimensionError(TDSError, ValueError):
    pass


class DomainError(TDSError, ValueError):
    """A point fell outside the open box a map or form is defined on."""


class NotOrthonormalError(TDSError, ValueError):
    pass


class MetricError(TDSError, ValueError):
    pass


class NotAMember(TDSError, ValueError):
    pass


class NotAPlaque(TDSError, ValueError):
    pass


class NotATangentVector(TDSError, ValueError):
    pass


class BaseMismatch(TDSError, ValueError):
    pass


class NotTangent(TDSError, ValueError):
    """Two plaques are not tangent along the requested directions."""


class NoSpanningPlaque(TDSError):
    """No plaque realizes the requested tangent vectors jointly.

    This is the computational face of a transverse point.
    """

    def __init__(self, message: str, certificate: dict | None = None):
        super().__init__(message)
        self.certificate = certificate or {}


class TransverseSpaceError(TDSError):
    pass


class TangentConditionViolation(TDSError):
    pass


class SurjectivityNotWitnessed(TDSError):
    pass


class IncompatibleCollection(TDSError):
    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class FixtureError(TDSError):
    """A fixture lacks a constructor an operation needs."""


class SchemaError(TDSError, ValueError):
    pass


class NoPointwisePreimage(TDSError):
    """An algebraic form is not induced by any pointwise form."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class NotSmooth(TDSError):
    """A map between spaces fails the smoothness checks."""
