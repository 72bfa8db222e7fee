"""Domain vocabulary: entities, verdicts and reason codes.

Every record type is an immutable value; mutation happens only through the
lexicon stores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ReasonCode(Enum):
    MISSING_FIELD = "missing_field"
    FORMAT_VIOLATION = "format_violation"
    MIXED_SCRIPT = "mixed_script"
    PROHIBITED_CONTENT = "prohibited_content"
    BLACKLISTED = "blacklisted"
    DUPLICATE = "duplicate"
    INVALID_CONTACT = "invalid_contact"


class Severity(Enum):
    FATAL = "fatal"
    CORRECTABLE = "correctable"


#: Reasons that deny registration outright; all others invite a resubmission.
_FATAL_CODES = frozenset({ReasonCode.PROHIBITED_CONTENT, ReasonCode.BLACKLISTED})


def reason_severity(code: ReasonCode) -> Severity:
    """Severity of a reason code: fatal reasons reject, correctable ones ask for new data."""
    return Severity.FATAL if code in _FATAL_CODES else Severity.CORRECTABLE


class Decision(Enum):
    ACCEPT = "accept"
    REQUIRE_CORRECTION = "require_correction"
    REJECT = "reject"


class TermSeverity(Enum):
    """Per-term policy: hard-reject the name or only flag it for a moderator."""

    REJECT = "reject"
    FLAG = "flag"


class Script(Enum):
    LATIN = "latin"
    CYRILLIC = "cyrillic"
    OTHER = "other"
    NONE = "none"


class AccountStatus(Enum):
    VERIFIED = "verified"
    CORRECTED = "corrected"
    CORRECTED_KEPT_NAME = "corrected_kept_name"
    UNDER_MODERATION = "under_moderation"
    BLOCKED = "blocked"


class AnonymityClass(Enum):
    IDENTIFIED = "identified"
    PARTIALLY_ANONYMOUS = "partially_anonymous"
    ANONYMOUS = "anonymous"


class ContactKind(Enum):
    EMAIL = "email"
    OTHER = "other"


#: Sanction ladder. Code 4 additionally inserts the name into the blacklist.
SANCTION_WARNING = 1
SANCTION_FORCED_RENAME = 2
SANCTION_TEMPORARY_BLOCK = 3
SANCTION_PERMANENT_BLOCK = 4

VALID_SANCTION_CODES = (1, 2, 3, 4)


def anonymity_class_for_level(level: int) -> AnonymityClass:
    """Derive the anonymity class from the count of verified contacts (capped at 3)."""
    if level <= 0:
        return AnonymityClass.ANONYMOUS
    if level < 3:
        return AnonymityClass.PARTIALLY_ANONYMOUS
    return AnonymityClass.IDENTIFIED


@dataclass(frozen=True)
class ScriptReport:
    dominant: Script
    mixed: bool
    per_script_counts: tuple[tuple[Script, int], ...] = ()

    def count(self, script: Script) -> int:
        for s, n in self.per_script_counts:
            if s is script:
                return n
        return 0


@dataclass(frozen=True)
class Reason:
    code: ReasonCode
    detail: str

    def __post_init__(self) -> None:
        needs_detail = {
            ReasonCode.PROHIBITED_CONTENT,
            ReasonCode.BLACKLISTED,
            ReasonCode.DUPLICATE,
        }
        if self.code in needs_detail and not self.detail:
            raise ValueError(f"reason {self.code.value} requires a nonempty detail")


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    reasons: tuple[Reason, ...]

    def __post_init__(self) -> None:
        if (self.decision is Decision.ACCEPT) != (len(self.reasons) == 0):
            raise ValueError("accept verdicts carry no reasons; non-accept verdicts need at least one")

    @classmethod
    def from_reasons(cls, reasons: tuple[Reason, ...], any_fatal: bool | None = None) -> "Verdict":
        """Combine collected reasons into a decision.

        ``any_fatal`` overrides the default per-code severity rule; the
        pipeline uses it when a matched term's own policy downgrades a
        normally fatal reason.
        """
        if not reasons:
            return cls(Decision.ACCEPT, ())
        if any_fatal is None:
            any_fatal = any(reason_severity(r.code) is Severity.FATAL for r in reasons)
        decision = Decision.REJECT if any_fatal else Decision.REQUIRE_CORRECTION
        return cls(decision, reasons)


@dataclass(frozen=True)
class UsernameRecord:
    id: str
    raw: str
    normalized: str
    skeleton: str
    script: ScriptReport
    created_at: int


@dataclass(frozen=True)
class ContactEntry:
    kind: ContactKind
    value: str
    verified: bool = False

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("contact value must be nonempty")


@dataclass(frozen=True)
class Account:
    id: str
    username_id: str
    anonymity_level: int
    contacts: tuple[ContactEntry, ...]
    registered_at: int
    status: AccountStatus

    @property
    def anonymity_class(self) -> AnonymityClass:
        return anonymity_class_for_level(self.anonymity_level)


@dataclass(frozen=True)
class BlacklistEntry:
    normalized_name: str
    sanction_code: int
    reason: str
    created_at: int

    def __post_init__(self) -> None:
        if self.sanction_code not in VALID_SANCTION_CODES:
            raise ValueError(f"sanction_code must be one of {VALID_SANCTION_CODES}")


@dataclass(frozen=True)
class Deviation:
    id: str
    account_id: str
    rule_code: ReasonCode
    sanction_code: int
    note: str
    created_at: int

    def __post_init__(self) -> None:
        if self.sanction_code not in VALID_SANCTION_CODES:
            raise ValueError(f"sanction_code must be one of {VALID_SANCTION_CODES}")


@dataclass(frozen=True)
class ProhibitedTerm:
    term: str
    category: str = ""
    severity: TermSeverity = TermSeverity.REJECT

    def __post_init__(self) -> None:
        if not self.term:
            raise ValueError("prohibited term must be nonempty")


@dataclass(frozen=True)
class Flag:
    account_id: str
    reasons: tuple[Reason, ...]
    detected_at: int
    store_revision: int

    def __post_init__(self) -> None:
        if not self.reasons:
            raise ValueError("a flag must carry at least one reason")


@dataclass(frozen=True)
class ModerationReport:
    generated_at: int
    groups: tuple[tuple[ReasonCode, tuple[Flag, ...]], ...]
    counts: tuple[tuple[ReasonCode, int], ...]

    def count(self, code: ReasonCode) -> int:
        for c, n in self.counts:
            if c is code:
                return n
        return 0
