"""Shared exception types and validation diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


class EpolisError(Exception):
    """Base class for every error raised by this package."""


class ParseError(EpolisError):
    """Input document is not well-formed for its declared format."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


@dataclass(frozen=True)
class Diagnostic:
    """One violated invariant, identified by a stable code."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ValidationError(EpolisError):
    """A document parsed but violates one or more invariants.

    Carries the full diagnostic list; validation never stops at the
    first problem.
    """

    def __init__(self, diagnostics):
        self.diagnostics: tuple[Diagnostic, ...] = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))

    @property
    def codes(self) -> set[str]:
        return {d.code for d in self.diagnostics}


class SchemaMismatch(EpolisError):
    """Imported data carries a header or key set that does not match the schema."""


class UnsupportedFormat(EpolisError):
    """Requested interchange format is not one of csv, json, xml, yaml."""


class GimbalProximity(EpolisError):
    """Pitch too close to +/-90 degrees for a well-conditioned Euler decomposition."""


class BadChoice(EpolisError):
    """Choice key is not one of the dilemma's choices."""


class TimestampOrder(EpolisError):
    """An answer timestamp precedes its prompt timestamp."""


class BadPlayerName(EpolisError):
    """Player name empty or longer than 64 characters."""


class NotComplete(EpolisError):
    """Blueprint requested for a session that has not completed."""


class UnknownSession(EpolisError):
    """No session with the given id."""


class UnknownPack(EpolisError):
    """No dilemma pack with the given id."""


class UnknownQuestion(EpolisError):
    """An action row references a question id absent from the pack."""


class CorruptRecord(EpolisError):
    """A non-trailing log record is malformed or inconsistent with replay."""


class BadCellSize(EpolisError):
    """Dwell-grid cell size must be positive."""
