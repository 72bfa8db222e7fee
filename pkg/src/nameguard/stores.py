"""Durable lexicon stores: prohibited terms, blacklist, username registry,
accounts and deviations.

Single-writer / multi-reader: mutators serialize on an internal lock and bump
a global revision counter; readers work on immutable snapshots that never
observe a partial mutation. Flags raised by scans are runtime state and are
not persisted or revisioned.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from types import MappingProxyType

from nameguard import kernels
from nameguard.errors import ConflictError, NotFoundError, StoreFormatError
from nameguard.model import (
    Account,
    AccountStatus,
    BlacklistEntry,
    ContactEntry,
    ContactKind,
    Deviation,
    Flag,
    ProhibitedTerm,
    ReasonCode,
    TermSeverity,
    UsernameRecord,
)
from nameguard.textops import FoldTable, confusable_fold, default_fold_table, detect_script, normalize


@dataclass(frozen=True)
class TermMatch:
    term: str
    offset: int
    severity: TermSeverity


def make_username_record(
    record_id: str, raw: str, fold_table: FoldTable, created_at: int
) -> UsernameRecord:
    """Build a record whose normalized and skeleton forms satisfy the invariants."""
    normalized = normalize(raw)
    return UsernameRecord(
        id=record_id,
        raw=raw,
        normalized=normalized,
        skeleton=confusable_fold(normalized, fold_table),
        script=detect_script(raw),
        created_at=created_at,
    )


@dataclass(frozen=True)
class StoreSnapshot:
    """Immutable view of all tables at one revision."""

    revision: int
    fold_table: FoldTable
    prohibited: MappingProxyType  # term -> ProhibitedTerm
    blacklist: MappingProxyType  # normalized_name -> BlacklistEntry
    registry: MappingProxyType  # id -> UsernameRecord
    skeleton_index: MappingProxyType  # skeleton -> tuple of ids
    accounts: MappingProxyType  # id -> Account
    deviations: tuple
    automaton: kernels.Automaton


class LexiconStores:
    def __init__(self, fold_table: FoldTable | None = None):
        self._lock = threading.RLock()
        self._fold_table = fold_table if fold_table is not None else default_fold_table()
        self._prohibited: dict[str, ProhibitedTerm] = {}
        self._blacklist: dict[str, BlacklistEntry] = {}
        self._registry: dict[str, UsernameRecord] = {}
        self._skeleton_index: dict[str, set[str]] = {}
        self._accounts: dict[str, Account] = {}
        self._deviations: list[Deviation] = []
        self._revision = 0
        self._batch_depth = 0
        self._batch_mutated = False
        self._automaton_cache: tuple[int, kernels.Automaton] | None = None
        self._prohibited_generation = 0
        # Runtime moderation queue state (not persisted, not revisioned).
        self._flags: list[Flag] = []
        self._open_flag_indexes: dict[str, list[int]] = {}
        self._last_flag_revision: dict[str, int] = {}

    @property
    def fold_table(self) -> FoldTable:
        return self._fold_table

    @property
    def revision(self) -> int:
        with self._lock:
            return self._revision

    def skeleton_of(self, raw: str) -> str:
        return confusable_fold(normalize(raw), self._fold_table)

    # -- write transaction plumbing --------------------------------------

    @contextmanager
    def batch(self):
        """Group several mutations into one atomic revision bump.

        A batch that performs no mutation (e.g. a rejected registration)
        leaves the revision untouched.
        """
        with self._lock:
            self._batch_depth += 1
            try:
                yield self
            finally:
                self._batch_depth -= 1
                if self._batch_depth == 0 and self._batch_mutated:
                    self._batch_mutated = False
                    self._revision += 1

    def _bump(self) -> None:
        if self._batch_depth == 0:
            self._revision += 1
        else:
            self._batch_mutated = True

    # -- mutators ---------------------------------------------------------

    def add_prohibited(self, term: ProhibitedTerm) -> int:
        if term.term != normalize(term.term):
            raise ValueError(f"prohibited term {term.term!r} is not in normalized form")
        with self._lock:
            self._prohibited[term.term] = term
            self._prohibited_generation += 1
            self._bump()
            return self._revision

    def remove_prohibited(self, term: str) -> int:
        with self._lock:
            if term not in self._prohibited:
                raise NotFoundError(f"prohibited term {term!r} not found")
            del self._prohibited[term]
            self._prohibited_generation += 1
            self._bump()
            return self._revision

    def add_blacklist(self, entry: BlacklistEntry) -> int:
        if entry.normalized_name != normalize(entry.normalized_name):
            raise ValueError(f"blacklist name {entry.normalized_name!r} is not in normalized form")
        with self._lock:
            self._blacklist[entry.normalized_name] = entry
            self._bump()
            return self._revision

    def remove_blacklist(self, normalized_name: str) -> int:
        with self._lock:
            if normalized_name not in self._blacklist:
                raise NotFoundError(f"blacklist entry {normalized_name!r} not found")
            del self._blacklist[normalized_name]
            self._bump()
            return self._revision

    def upsert_record(self, record: UsernameRecord) -> int:
        if record.normalized != normalize(record.raw):
            raise ValueError("record normalized form does not match normalize(raw)")
        if record.skeleton != confusable_fold(record.normalized, self._fold_table):
            raise ValueError("record skeleton does not match the configured fold table")
        with self._lock:
            existing = self._registry.get(record.id)
            if existing is not None and existing.raw != record.raw:
                raise ConflictError(
                    f"record id {record.id!r} already holds name {existing.raw!r}"
                )
            if existing is not None:
                self._skeleton_index[existing.skeleton].discard(record.id)
                if not self._skeleton_index[existing.skeleton]:
                    del self._skeleton_index[existing.skeleton]
            self._registry[record.id] = record
            self._skeleton_index.setdefault(record.skeleton, set()).add(record.id)
            self._bump()
            return self._revision

    def upsert_account(self, account: Account) -> int:
        with self._lock:
            if account.username_id not in self._registry:
                raise NotFoundError(f"username record {account.username_id!r} not found")
            self._accounts[account.id] = account
            self._bump()
            return self._revision

    def record_deviation(self, deviation: Deviation) -> int:
        with self._lock:
            if deviation.account_id not in self._accounts:
                raise NotFoundError(f"account {deviation.account_id!r} not found")
            self._deviations.append(deviation)
            self._bump()
            return self._revision

    # -- point reads --------------------------------------------------------

    def get_account(self, account_id: str) -> Account | None:
        with self._lock:
            return self._accounts.get(account_id)

    def get_record(self, record_id: str) -> UsernameRecord | None:
        with self._lock:
            return self._registry.get(record_id)

    # -- runtime flag queue -------------------------------------------------

    def add_flag(self, flag: Flag) -> None:
        with self._lock:
            self._flags.append(flag)
            index = len(self._flags) - 1
            self._open_flag_indexes.setdefault(flag.account_id, []).append(index)
            self._last_flag_revision[flag.account_id] = flag.store_revision

    def open_flags(self) -> list[Flag]:
        with self._lock:
            indexes = sorted(i for lst in self._open_flag_indexes.values() for i in lst)
            return [self._flags[i] for i in indexes]

    def resolve_flags(self, account_id: str) -> int:
        """Close the account's open flags (a moderator acted on it)."""
        with self._lock:
            dropped = self._open_flag_indexes.pop(account_id, [])
            return len(dropped)

    def last_flag_revision(self, account_id: str) -> int | None:
        with self._lock:
            return self._last_flag_revision.get(account_id)

    def accounts_with_open_flags(self) -> set[str]:
        with self._lock:
            return set(self._open_flag_indexes)

    # -- snapshots ----------------------------------------------------------

    def _automaton(self) -> kernels.Automaton:
        cache = self._automaton_cache
        if cache is not None and cache[0] == self._prohibited_generation:
            return cache[1]
        automaton = kernels.build_automaton(sorted(self._prohibited))
        self._automaton_cache = (self._prohibited_generation, automaton)
        return automaton

    def snapshot(self) -> StoreSnapshot:
        with self._lock:
            return StoreSnapshot(
                revision=self._revision,
                fold_table=self._fold_table,
                prohibited=MappingProxyType(dict(self._prohibited)),
                blacklist=MappingProxyType(dict(self._blacklist)),
                registry=MappingProxyType(dict(self._registry)),
                skeleton_index=MappingProxyType(
                    {k: tuple(sorted(v)) for k, v in self._skeleton_index.items()}
                ),
                accounts=MappingProxyType(dict(self._accounts)),
                deviations=tuple(self._deviations),
                automaton=self._automaton(),
            )


# -- queries over snapshots ---------------------------------------------


def match_prohibited(name: str, snapshot: StoreSnapshot) -> list[TermMatch]:
    """Every prohibited-term occurrence in the confusable-folded name.

    Sorted by offset, longer terms first at equal offsets.
    """
    folded = confusable_fold(name, snapshot.fold_table)
    hits = kernels.scan(snapshot.automaton, folded)
    matches = [
        TermMatch(
            term=snapshot.automaton.terms[term_index],
            offset=offset,
            severity=snapshot.prohibited[snapshot.automaton.terms[term_index]].severity,
        )
        for offset, term_index in hits
    ]
    matches.sort(key=lambda m: (m.offset, -len(m.term), m.term))
    return matches


def is_blacklisted(name: str, snapshot: StoreSnapshot) -> BlacklistEntry | None:
    """Entry whose key equals the normalized name or its confusable fold."""
    entry = snapshot.blacklist.get(name)
    if entry is not None:
        return entry
    return snapshot.blacklist.get(confusable_fold(name, snapshot.fold_table))


def find_duplicates(raw: str, snapshot: StoreSnapshot) -> list[UsernameRecord]:
    """All registry records sharing the candidate's skeleton, oldest first."""
    skeleton = confusable_fold(normalize(raw), snapshot.fold_table)
    ids = snapshot.skeleton_index.get(skeleton, ())
    records = [snapshot.registry[i] for i in ids]
    records.sort(key=lambda r: (r.created_at, r.id))
    return records


# -- persistence ----------------------------------------------------------

PROHIBITED_FILE = "prohibited.tsv"
BLACKLIST_FILE = "blacklist.tsv"
REGISTRY_FILE = "registry.tsv"
ACCOUNTS_FILE = "accounts.tsv"
DEVIATIONS_FILE = "deviations.tsv"
META_FILE = "meta.tsv"

def _encode_field(value: str, *, contact: bool = False) -> str:
    """Percent-encode the few characters that would corrupt the TSV layout."""
    value = value.replace("%", "%25").replace("\t", "%09").replace("\n", "%0A").replace("\r", "%0D")
    if contact:
        value = value.replace(";", "%3B").replace("=", "%3D")
    if value.startswith("#"):
        value = "%23" + value[1:]
    return value


def _decode_field(value: str) -> str:
    for src, dst in (("%23", "#"), ("%3B", ";"), ("%3D", "="), ("%09", "\t"), ("%0A", "\n"), ("%0D", "\r")):
        value = value.replace(src, dst)
    return value.replace("%25", "%")


def _format_ts(epoch: int) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_ts(text: str, filename: str, line: int) -> int:
    try:
        dt = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError:
        raise StoreFormatError(filename, line, f"bad timestamp {text!r}, expected ISO-8601 UTC") from None
    return int(dt.replace(tzinfo=timezone.utc).timestamp())


def _parse_int(text: str, filename: str, line: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise StoreFormatError(filename, line, f"bad {what} {text!r}, expected an integer") from None


def _iter_rows(path: Path, expected_fields: int):
    """Yield (lineno, raw fields); callers decode per column because the
    contacts column splits on separators that decoding would reintroduce."""
    filename = path.name
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != expected_fields:
                raise StoreFormatError(
                    filename, lineno, f"expected {expected_fields} fields, got {len(fields)}"
                )
            yield lineno, fields


def _write_rows(path: Path, header: str, rows) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header}\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def _contacts_to_field(contacts: tuple[ContactEntry, ...]) -> str:
    return ";".join(
        f"{c.kind.value}={_encode_field(c.value, contact=True)}" for c in contacts
    )


def _contacts_from_field(field: str, filename: str, line: int) -> tuple[ContactEntry, ...]:
    if not field:
        return ()
    entries = []
    for item in field.split(";"):
        kind_text, sep, value = item.partition("=")
        if not sep:
            raise StoreFormatError(filename, line, f"bad contact item {item!r}, expected kind=value")
        try:
            kind = ContactKind(kind_text)
        except ValueError:
            raise StoreFormatError(filename, line, f"unknown contact kind {kind_text!r}") from None
        entries.append(ContactEntry(kind=kind, value=_decode_field(value)))
    return tuple(entries)


def save(stores: LexiconStores, directory: str | Path) -> None:
    """Write every table as a deterministic, diff-friendly TSV file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    snap = stores.snapshot()

    _write_rows(
        directory / PROHIBITED_FILE,
        "term\tcategory\tseverity",
        (
            [_encode_field(t.term), _encode_field(t.category), t.severity.value]
            for t in sorted(snap.prohibited.values(), key=lambda t: t.term)
        ),
    )
    _write_rows(
        directory / BLACKLIST_FILE,
        "normalized_name\tsanction_code\tcreated_at\treason",
        (
            [
                _encode_field(e.normalized_name),
                str(e.sanction_code),
                _format_ts(e.created_at),
                _encode_field(e.reason),
            ]
            for e in sorted(snap.blacklist.values(), key=lambda e: e.normalized_name)
        ),
    )
    _write_rows(
        directory / REGISTRY_FILE,
        "id\traw\tnormalized\tskeleton\tcreated_at",
        (
            [
                _encode_field(r.id),
                _encode_field(r.raw),
                _encode_field(r.normalized),
                _encode_field(r.skeleton),
                _format_ts(r.created_at),
            ]
            for r in sorted(snap.registry.values(), key=lambda r: (r.created_at, r.id))
        ),
    )
    _write_rows(
        directory / ACCOUNTS_FILE,
        "id\tusername_id\tanonymity_level\tstatus\tregistered_at\tcontacts",
        (
            [
                _encode_field(a.id),
                _encode_field(a.username_id),
                str(a.anonymity_level),
                a.status.value,
                _format_ts(a.registered_at),
                _contacts_to_field(a.contacts),
            ]
            for a in sorted(snap.accounts.values(), key=lambda a: (a.registered_at, a.id))
        ),
    )
    _write_rows(
        directory / DEVIATIONS_FILE,
        "id\taccount_id\trule_code\tsanction_code\tcreated_at\tnote",
        (
            [
                _encode_field(d.id),
                _encode_field(d.account_id),
                d.rule_code.value,
                str(d.sanction_code),
                _format_ts(d.created_at),
                _encode_field(d.note),
            ]
            for d in snap.deviations
        ),
    )
    _write_rows(directory / META_FILE, "key\tvalue", [["revision", str(snap.revision)]])


def load(directory: str | Path, fold_table: FoldTable | None = None) -> LexiconStores:
    """Load a data directory; missing files mean empty tables."""
    directory = Path(directory)
    stores = LexiconStores(fold_table=fold_table)

    path = directory / PROHIBITED_FILE
    if path.exists():
        for lineno, (term, category, severity_text) in _iter_rows(path, 3):
            term = _decode_field(term)
            try:
                severity = TermSeverity(severity_text)
            except ValueError:
                raise StoreFormatError(
                    path.name, lineno, f"unknown severity {severity_text!r}, expected reject or flag"
                ) from None
            if term != normalize(term):
                raise StoreFormatError(path.name, lineno, f"term {term!r} is not in normalized form")
            stores._prohibited[term] = ProhibitedTerm(
                term=term, category=_decode_field(category), severity=severity
            )
        stores._prohibited_generation += 1

    path = directory / BLACKLIST_FILE
    if path.exists():
        for lineno, (name, code_text, ts_text, reason) in _iter_rows(path, 4):
            name = _decode_field(name)
            code = _parse_int(code_text, path.name, lineno, "sanction code")
            if code not in (1, 2, 3, 4):
                raise StoreFormatError(path.name, lineno, f"sanction code {code} out of range 1..4")
            if name != normalize(name):
                raise StoreFormatError(path.name, lineno, f"name {name!r} is not in normalized form")
            stores._blacklist[name] = BlacklistEntry(
                normalized_name=name,
                sanction_code=code,
                reason=_decode_field(reason),
                created_at=_parse_ts(ts_text, path.name, lineno),
            )

    path = directory / REGISTRY_FILE
    if path.exists():
        for lineno, (record_id, raw, _normalized, _skeleton, ts_text) in _iter_rows(path, 5):
            # Normalized and skeleton columns are recomputed so the invariants
            # hold even after the fold table changed between runs.
            record_id = _decode_field(record_id)
            record = make_username_record(
                record_id, _decode_field(raw), stores.fold_table, _parse_ts(ts_text, path.name, lineno)
            )
            if record_id in stores._registry:
                raise StoreFormatError(path.name, lineno, f"duplicate record id {record_id!r}")
            stores._registry[record_id] = record
            stores._skeleton_index.setdefault(record.skeleton, set()).add(record_id)

    path = directory / ACCOUNTS_FILE
    if path.exists():
        for lineno, (account_id, username_id, level_text, status_text, ts_text, contacts_field) in _iter_rows(path, 6):
            account_id = _decode_field(account_id)
            username_id = _decode_field(username_id)
            if username_id not in stores._registry:
                raise StoreFormatError(
                    path.name, lineno, f"account references unknown username record {username_id!r}"
                )
            try:
                status = AccountStatus(status_text)
            except ValueError:
                raise StoreFormatError(path.name, lineno, f"unknown status {status_text!r}") from None
            stores._accounts[account_id] = Account(
                id=account_id,
                username_id=username_id,
                anonymity_level=_parse_int(level_text, path.name, lineno, "anonymity level"),
                contacts=_contacts_from_field(contacts_field, path.name, lineno),
                registered_at=_parse_ts(ts_text, path.name, lineno),
                status=status,
            )

    path = directory / DEVIATIONS_FILE
    if path.exists():
        for lineno, (dev_id, account_id, rule_text, code_text, ts_text, note) in _iter_rows(path, 6):
            account_id = _decode_field(account_id)
            if account_id not in stores._accounts:
                raise StoreFormatError(
                    path.name, lineno, f"deviation references unknown account {account_id!r}"
                )
            try:
                rule_code = ReasonCode(rule_text)
            except ValueError:
                raise StoreFormatError(path.name, lineno, f"unknown rule code {rule_text!r}") from None
            code = _parse_int(code_text, path.name, lineno, "sanction code")
            if code not in (1, 2, 3, 4):
                raise StoreFormatError(path.name, lineno, f"sanction code {code} out of range 1..4")
            stores._deviations.append(
                Deviation(
                    id=_decode_field(dev_id),
                    account_id=account_id,
                    rule_code=rule_code,
                    sanction_code=code,
                    note=_decode_field(note),
                    created_at=_parse_ts(ts_text, path.name, lineno),
                )
            )

    path = directory / META_FILE
    if path.exists():
        for lineno, (key, value) in _iter_rows(path, 2):
            if key == "revision":
                stores._revision = _parse_int(value, path.name, lineno, "revision")

    return stores
