"""Exception types shared across the package."""

from __future__ import annotations


class NameguardError(Exception):
    """Base class for all package errors."""


class NotFoundError(NameguardError):
    """A referenced entity (account, term, blacklist entry) does not exist."""


class ConflictError(NameguardError):
    """A mutation contradicts existing state, e.g. an id reused for a different name."""


class InvalidStateError(NameguardError):
    """The entity exists but is in a state that forbids the operation."""


class StorageError(NameguardError):
    """An underlying read or write failed."""


class StoreFormatError(NameguardError):
    """A persisted table file is malformed.

    Carries the offending file and 1-based line number so admins can fix the
    exact line.
    """

    def __init__(self, filename: str, line: int, problem: str):
        self.filename = filename
        self.line = line
        self.problem = problem
        super().__init__(f"{filename}: line {line}: {problem}")


class EfficiencyUndefinedError(NameguardError):
    """The efficiency indicator's side condition failed.

    The indicator divides by (verified - low_adequacy) and is undefined when
    the two counts are equal.
    """
