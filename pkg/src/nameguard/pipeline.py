"""The verification pipeline: ordered checks, registration, rescans, sanctions
and moderator report assembly."""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, replace

from nameguard.errors import InvalidStateError, NotFoundError
from nameguard.model import (
    Account,
    AccountStatus,
    BlacklistEntry,
    ContactEntry,
    ContactKind,
    Decision,
    Deviation,
    Flag,
    ModerationReport,
    Reason,
    ReasonCode,
    TermSeverity,
    UsernameRecord,
    Verdict,
)
from nameguard.stores import (
    LexiconStores,
    StoreSnapshot,
    find_duplicates,
    is_blacklisted,
    make_username_record,
    match_prohibited,
)
from nameguard.textops import (
    DEFAULT_TOKEN_RULES,
    TokenRules,
    detect_script,
    normalize,
    parse_format,
    validate_contact,
)


@dataclass(frozen=True)
class RegistrationRequest:
    username: str
    email: str | None = None
    extra_contacts: tuple[ContactEntry, ...] = ()


def _now() -> int:
    return int(time.time())


def _new_id() -> str:
    return uuid.uuid4().hex


def _name_check_reasons(
    raw: str,
    snapshot: StoreSnapshot,
    rules: TokenRules,
    exclude_record_id: str | None = None,
) -> tuple[list[Reason], bool]:
    """Checks 2..6 over a name; returns collected reasons and whether any is fatal.

    Prohibited matches are fatal only when the matched term's own policy says
    reject; flag-only terms still surface as reasons for the moderator but do
    not deny registration.
    """
    reasons: list[Reason] = []
    fatal = False

    parse = parse_format(raw, rules)
    if not parse.valid:
        reasons.append(Reason(ReasonCode.FORMAT_VIOLATION, parse.violation or ""))

    script_report = detect_script(raw)
    if script_report.mixed:
        composition = "+".join(s.value for s, _ in script_report.per_script_counts)
        reasons.append(Reason(ReasonCode.MIXED_SCRIPT, composition))

    normalized = normalize(raw)

    for match in match_prohibited(normalized, snapshot):
        reasons.append(Reason(ReasonCode.PROHIBITED_CONTENT, f"{match.term}@{match.offset}"))
        if match.severity is TermSeverity.REJECT:
            fatal = True

    entry = is_blacklisted(normalized, snapshot)
    if entry is not None:
        reasons.append(Reason(ReasonCode.BLACKLISTED, entry.normalized_name))
        fatal = True

    duplicates = [
        r for r in find_duplicates(raw, snapshot) if r.id != exclude_record_id
    ]
    if duplicates:
        reasons.append(Reason(ReasonCode.DUPLICATE, ";".join(r.id for r in duplicates)))

    return reasons, fatal


def verify(
    req: RegistrationRequest,
    snapshot: StoreSnapshot,
    rules: TokenRules = DEFAULT_TOKEN_RULES,
) -> Verdict:
    """Run every check in fixed order and collect all applicable reasons.

    Field presence, then the five name checks, then contact syntax when an
    e-mail was given. Any fatal reason rejects; otherwise reasons invite a
    corrected resubmission.
    """
    reasons: list[Reason] = []
    fatal = False

    if not req.username:
        reasons.append(Reason(ReasonCode.MISSING_FIELD, "username"))
    else:
        name_reasons, fatal = _name_check_reasons(req.username, snapshot, rules)
        reasons.extend(name_reasons)

    if req.email is not None:
        check = validate_contact(req.email)
        if not check.valid:
            reasons.append(Reason(ReasonCode.INVALID_CONTACT, check.violation or ""))

    return Verdict.from_reasons(tuple(reasons), any_fatal=fatal)


def register(
    req: RegistrationRequest,
    stores: LexiconStores,
    rules: TokenRules = DEFAULT_TOKEN_RULES,
    now: int | None = None,
) -> tuple[Account, UsernameRecord] | Verdict:
    """Verify and, on acceptance, persist a new username record plus account.

    Non-accept verdicts are returned as values and mutate nothing. Newcomers
    start under moderation; promotion to verified is a moderator action.
    """
    timestamp = _now() if now is None else now
    with stores.batch():
        verdict = verify(req, stores.snapshot(), rules)
        if verdict.decision is not Decision.ACCEPT:
            return verdict

        record = make_username_record(_new_id(), req.username, stores.fold_table, timestamp)
        contacts: list[ContactEntry] = []
        if req.email is not None:
            contacts.append(ContactEntry(kind=ContactKind.EMAIL, value=req.email))
        contacts.extend(req.extra_contacts)
        level = min(3, sum(1 for c in contacts if c.verified))
        account = Account(
            id=_new_id(),
            username_id=record.id,
            anonymity_level=level,
            contacts=tuple(contacts),
            registered_at=timestamp,
            status=AccountStatus.UNDER_MODERATION,
        )
        stores.upsert_record(record)
        stores.upsert_account(account)
    return account, record


def post_registration_scan(
    stores: LexiconStores,
    rules: TokenRules = DEFAULT_TOKEN_RULES,
    now: int | None = None,
) -> list[Flag]:
    """Re-run the name checks for every non-blocked account on one snapshot.

    Emits one flag per account with problems; an account already flagged at
    the current revision is not flagged again.
    """
    timestamp = _now() if now is None else now
    snapshot = stores.snapshot()
    new_flags: list[Flag] = []
    for account_id in sorted(snapshot.accounts):
        account = snapshot.accounts[account_id]
        if account.status is AccountStatus.BLOCKED:
            continue
        if stores.last_flag_revision(account_id) == snapshot.revision:
            continue
        record = snapshot.registry[account.username_id]
        reasons, _ = _name_check_reasons(
            record.raw, snapshot, rules, exclude_record_id=record.id
        )
        if not reasons:
            continue
        flag = Flag(
            account_id=account_id,
            reasons=tuple(reasons),
            detected_at=timestamp,
            store_revision=snapshot.revision,
        )
        stores.add_flag(flag)
        new_flags.append(flag)
    return new_flags


def apply_sanction(
    stores: LexiconStores,
    account_id: str,
    sanction_code: int,
    rule_code: ReasonCode,
    note: str = "",
    now: int | None = None,
) -> Deviation:
    """Record a deviation and apply the sanction ladder to the account.

    1 warns, 2 sends the account back under moderation pending a rename,
    3 blocks, 4 blocks and inserts the normalized name into the blacklist.
    """
    if sanction_code not in (1, 2, 3, 4):
        raise ValueError(f"sanction code must be 1..4, got {sanction_code}")
    timestamp = _now() if now is None else now
    with stores.batch():
        account = stores.get_account(account_id)
        if account is None:
            raise NotFoundError(f"account {account_id!r} not found")
        if account.status is AccountStatus.BLOCKED:
            raise InvalidStateError(f"account {account_id!r} is already blocked")

        deviation = Deviation(
            id=_new_id(),
            account_id=account_id,
            rule_code=rule_code,
            sanction_code=sanction_code,
            note=note,
            created_at=timestamp,
        )
        stores.record_deviation(deviation)

        if sanction_code == 2:
            stores.upsert_account(replace(account, status=AccountStatus.UNDER_MODERATION))
        elif sanction_code in (3, 4):
            stores.upsert_account(replace(account, status=AccountStatus.BLOCKED))
        if sanction_code == 4:
            record = stores.get_record(account.username_id)
            if record is None:
                raise NotFoundError(f"username record {account.username_id!r} not found")
            stores.add_blacklist(
                BlacklistEntry(
                    normalized_name=record.normalized,
                    sanction_code=4,
                    reason=note or f"blocked account {account_id}",
                    created_at=timestamp,
                )
            )
        stores.resolve_flags(account_id)
    return deviation


def set_account_status(
    stores: LexiconStores, account_id: str, status: AccountStatus
) -> Account:
    """Moderator state transition (approve, record a rename, etc.)."""
    with stores.batch():
        account = stores.get_account(account_id)
        if account is None:
            raise NotFoundError(f"account {account_id!r} not found")
        updated = replace(account, status=status)
        stores.upsert_account(updated)
        stores.resolve_flags(account_id)
    return updated


def generate_report(flags: list[Flag], now: int | None = None) -> ModerationReport:
    """Group flags by their first reason code with per-code counts.

    Deterministic: groups follow the reason-code enum order and flags sort by
    detection time, so shuffled input yields an identical report.
    """
    timestamp = _now() if now is None else now
    buckets: dict[ReasonCode, list[Flag]] = {code: [] for code in ReasonCode}
    for flag in flags:
        buckets[flag.reasons[0].code].append(flag)
    groups = []
    counts = []
    for code in ReasonCode:
        bucket = sorted(buckets[code], key=lambda f: (f.detected_at, f.account_id))
        groups.append((code, tuple(bucket)))
        counts.append((code, len(bucket)))
    return ModerationReport(generated_at=timestamp, groups=tuple(groups), counts=tuple(counts))
