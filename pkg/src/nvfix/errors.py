"""Exception hierarchy shared by all nvfix modules."""

from __future__ import annotations


class NvfixError(Exception):
    """Base class for every error raised by nvfix."""


# group machinery
class DegreeMismatch(NvfixError):
    pass


class CapExceeded(NvfixError):
    pass


class IndexOutOfRange(NvfixError):
    pass


class PermutationSyntaxError(NvfixError, ValueError):
    pass


# descriptors
class RelationViolation(NvfixError):
    pass


class NotRealizable(NvfixError):
    pass


# nielsen engine
class EmptyInput(NvfixError):
    pass


class NotFree(NvfixError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class MissingRepresentative(NvfixError):
    pass


class InconsistentInput(NvfixError):
    pass


class UnsupportedSurface(NvfixError):
    pass


# torus
class SplitInput(NvfixError):
    pass


class SingularCovering(NvfixError):
    pass


class InconsistentPayload(NvfixError):
    pass


# geometry
class DomainMismatch(NvfixError):
    pass


class EpsilonTooLarge(NvfixError):
    pass


class ValidationFailed(NvfixError):
    pass


# numerics
class GridTooCoarse(NvfixError):
    pass


class ZeroOnCircle(NvfixError):
    pass


class DegreeUnstable(NvfixError):
    pass


class InconsistentClass(NvfixError):
    pass


# cli
class ConfigError(NvfixError):
    """Bad configuration; ``field`` and ``line`` locate the problem when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class UnknownSuite(NvfixError):
    pass
