"""Exception types shared across the engine.

The command line maps these onto exit codes: domain refusals (conflict,
not-found, denied, forbidden, invalid argument) exit 2, file problems
(parse errors, unsupported snapshot versions, integrity violations) exit 3.
"""

from __future__ import annotations


class PrkgError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(PrkgError):
    """A caller-supplied value violates a documented constraint."""


class NotFound(PrkgError):
    """A referenced node, relationship, role, or inbox entry does not exist."""


class Conflict(PrkgError):
    """The operation would duplicate something that must stay unique."""


class Forbidden(PrkgError):
    """The operation is never allowed, regardless of role (e.g. deleting the owner)."""


class AccessDenied(PrkgError):
    """Role-based access control refused the operation."""


class IntegrityError(PrkgError):
    """A loaded snapshot is structurally inconsistent."""


class UnsupportedVersion(PrkgError):
    """A snapshot declares a format version this build cannot read."""


class FileParseError(PrkgError):
    """An input file (snapshot, config, triples, bibliography) failed to parse."""

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
