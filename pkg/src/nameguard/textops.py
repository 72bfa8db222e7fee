"""Pure text layer: normalization, confusable folding, name grammar, script detection.

Everything here is a pure function over immutable inputs and is safe to call
from any thread.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from nameguard.model import Script, ScriptReport

_WS_RUN = re.compile(r"\s+")


def normalize(raw: str) -> str:
    """Canonical lowercase form of a name.

    Pipeline: trim outer whitespace, compatibility-decompose, lowercase, then
    collapse every remaining whitespace run into a single "." separator.
    Decomposition can surface new edge whitespace (e.g. U+309B expands to a
    space plus a combining mark), so the trim is re-applied before collapsing
    to keep the function idempotent.
    """
    s = raw.strip()
    s = unicodedata.normalize("NFKD", s)
    s = s.lower()
    s = s.strip()
    return _WS_RUN.sub(".", s)


@dataclass(frozen=True)
class FoldTable:
    """Single-character to replacement-text mapping used for skeleton folding.

    Shipped tables only map into characters that are themselves unmapped, so
    folding twice equals folding once.
    """

    entries: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for src in self.entries:
            if len(src) != 1:
                raise ValueError(f"fold table keys must be single characters, got {src!r}")
        object.__setattr__(
            self, "_translation", {ord(src): dst for src, dst in self.entries.items()}
        )

    def apply(self, text: str) -> str:
        return text.translate(self._translation)

    def merged_with(self, other: "FoldTable") -> "FoldTable":
        combined = dict(self.entries)
        combined.update(other.entries)
        return FoldTable(combined)


EMPTY_FOLD_TABLE = FoldTable({})


def confusable_fold(normalized: str, table: FoldTable) -> str:
    """Replace every character that has a table entry; others pass through."""
    return table.apply(normalized)


def parse_fold_table(text: str, filename: str = "<string>") -> FoldTable:
    """Parse a fold table file: ``<source-codepoint-hex><TAB><replacement>`` per line.

    Lines starting with ``#`` and blank lines are ignored.
    """
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip("\r")
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{filename}: line {lineno}: expected 2 tab-separated fields, got {len(parts)}")
        cp_hex, replacement = parts
        try:
            source = chr(int(cp_hex, 16))
        except (ValueError, OverflowError):
            raise ValueError(f"{filename}: line {lineno}: bad codepoint {cp_hex!r}") from None
        entries[source] = replacement
    return FoldTable(entries)


def load_fold_table(path: str | Path) -> FoldTable:
    path = Path(path)
    return parse_fold_table(path.read_text(encoding="utf-8"), filename=str(path))


def _packaged_table(name: str) -> FoldTable:
    text = resources.files("nameguard.data").joinpath(name).read_text(encoding="utf-8")
    return parse_fold_table(text, filename=name)


def default_fold_table() -> FoldTable:
    """Union of the shipped leet and Latin/Cyrillic confusable tables."""
    return _packaged_table("leet.tsv").merged_with(_packaged_table("confusables.tsv"))


@dataclass(frozen=True)
class TokenRules:
    """Grammar knobs for name tokens; policy defaults, not hard-wired."""

    min_len: int = 2
    max_len: int = 32
    extra_chars: str = "-'"


DEFAULT_TOKEN_RULES = TokenRules()


@dataclass(frozen=True)
class FormatParse:
    valid: bool
    first: str = ""
    last: str = ""
    violation: str | None = None


def _check_token(token: str, label: str, rules: TokenRules) -> str | None:
    if not token:
        return f"{label} name token is empty"
    if len(token) < rules.min_len:
        return f"{label} name token is shorter than {rules.min_len} characters"
    if len(token) > rules.max_len:
        return f"{label} name token is longer than {rules.max_len} characters"
    if not unicodedata.category(token[0]).startswith("L"):
        return f"{label} name token must start with a letter"
    for ch in token[1:]:
        if unicodedata.category(ch).startswith("L") or ch in rules.extra_chars:
            continue
        return f"{label} name token contains a disallowed character {ch!r}"
    return None


def parse_format(raw: str, rules: TokenRules = DEFAULT_TOKEN_RULES) -> FormatParse:
    """Check a raw name against the First.Last grammar.

    Token grammar: first character a letter, remaining characters letters,
    hyphen or apostrophe; no whitespace anywhere; exactly one "." separator.
    """
    if not raw:
        return FormatParse(False, violation="name is empty; expected First.Last with a '.' separator")
    if any(ch.isspace() for ch in raw):
        return FormatParse(
            False,
            violation="whitespace is not allowed; first and last name must be joined by a '.' separator",
        )
    dots = raw.count(".")
    if dots == 0:
        return FormatParse(False, violation="missing the '.' separator between first and last name")
    if dots > 1:
        parts = raw.split(".")
        if any(not p for p in parts):
            return FormatParse(False, violation="empty name token next to a '.' separator")
        return FormatParse(False, violation="more than one '.' separator")
    first, last = raw.split(".")
    for token, label in ((first, "first"), (last, "last")):
        problem = _check_token(token, label, rules)
        if problem:
            return FormatParse(False, violation=problem)
    return FormatParse(True, first=first, last=last)


def _letter_script(ch: str) -> str:
    name = unicodedata.name(ch, "")
    if "CYRILLIC" in name:
        return "cyrillic"
    if "LATIN" in name:
        return "latin"
    return "other"


def detect_script(raw: str) -> ScriptReport:
    """Count letters per script and report the dominant one.

    Only letter characters count. Scripts other than Latin and Cyrillic pool
    into "other". Ties resolve in the fixed order Latin, Cyrillic, other.
    """
    counts = {"latin": 0, "cyrillic": 0, "other": 0}
    for ch in raw:
        if unicodedata.category(ch).startswith("L"):
            counts[_letter_script(ch)] += 1
    if sum(counts.values()) == 0:
        return ScriptReport(dominant=Script.NONE, mixed=False, per_script_counts=())
    order = (Script.LATIN, Script.CYRILLIC, Script.OTHER)
    dominant = max(order, key=lambda s: counts[s.value])
    mixed = sum(1 for v in counts.values() if v > 0) >= 2
    per = tuple((s, counts[s.value]) for s in order if counts[s.value] > 0)
    return ScriptReport(dominant=dominant, mixed=mixed, per_script_counts=per)


@dataclass(frozen=True)
class ContactCheck:
    valid: bool
    violation: str | None = None


def validate_contact(email: str) -> ContactCheck:
    """Syntactic e-mail check: one "@", dotted domain with nonempty labels, no whitespace."""
    if len(email) > 254:
        return ContactCheck(False, "address is longer than 254 characters")
    if any(ch.isspace() for ch in email):
        return ContactCheck(False, "address contains whitespace")
    if email.count("@") != 1:
        return ContactCheck(False, "address must contain exactly one '@'")
    local, domain = email.split("@")
    if not local:
        return ContactCheck(False, "the part before '@' is empty")
    if "." not in domain:
        return ContactCheck(False, "domain must contain at least one '.'")
    if any(not label for label in domain.split(".")):
        return ContactCheck(False, "domain contains an empty label")
    return ContactCheck(True)
