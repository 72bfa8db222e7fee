"""Independent reference implementations used to check the engine.

Everything here is deliberately naive (double loops, char-by-char folding,
per-rule evaluation) and shares no code with the package internals it checks.
"""

from __future__ import annotations

import re
import unicodedata

_WS = re.compile(r"\s+")


def ref_normalize(raw: str) -> str:
    s = unicodedata.normalize("NFKD", raw.strip()).lower().strip()
    return _WS.sub(".", s)


def ref_fold(text: str, entries: dict[str, str]) -> str:
    out = []
    for ch in text:
        out.append(entries.get(ch, ch))
    return "".join(out)


def naive_scan(name: str, terms: list[str]) -> list[tuple[int, str]]:
    """Every (offset, term) occurrence found by a double loop."""
    hits = []
    for offset in range(len(name)):
        for term in terms:
            if name.startswith(term, offset):
                hits.append((offset, term))
    hits.sort(key=lambda h: (h[0], -len(h[1]), h[1]))
    return hits


def ref_format_valid(raw: str, min_len: int = 2, max_len: int = 32, extra: str = "-'") -> bool:
    if any(ch.isspace() for ch in raw):
        return False
    if raw.count(".") != 1:
        return False
    first, last = raw.split(".")
    for token in (first, last):
        if not (min_len <= len(token) <= max_len):
            return False
        if not unicodedata.category(token[0]).startswith("L"):
            return False
        for ch in token[1:]:
            if not (unicodedata.category(ch).startswith("L") or ch in extra):
                return False
    return True


def ref_script_counts(raw: str) -> dict[str, int]:
    counts = {"latin": 0, "cyrillic": 0, "other": 0}
    for ch in raw:
        if not unicodedata.category(ch).startswith("L"):
            continue
        name = unicodedata.name(ch, "")
        if "CYRILLIC" in name:
            counts["cyrillic"] += 1
        elif "LATIN" in name:
            counts["latin"] += 1
        else:
            counts["other"] += 1
    return counts


def ref_email_valid(email: str) -> bool:
    if len(email) > 254 or any(ch.isspace() for ch in email):
        return False
    if email.count("@") != 1:
        return False
    local, domain = email.split("@")
    if not local or "." not in domain:
        return False
    return all(domain.split("."))


def ref_verify(
    username: str,
    email: str | None,
    prohibited: list[tuple[str, str]],  # (term, "reject"|"flag")
    blacklist: set[str],
    registry: list[tuple[str, str]],  # (id, raw)
    fold_entries: dict[str, str],
) -> tuple[str, list[tuple[str, str]]]:
    """Rule-by-rule evaluation combined by the severity rule.

    Returns (decision, [(reason_code, detail), ...]) with the same check
    order the engine promises: presence, format, script, prohibited,
    blacklist, duplicates, contact.
    """
    reasons: list[tuple[str, str]] = []
    fatal = False

    if not username:
        reasons.append(("missing_field", "username"))
    else:
        if not ref_format_valid(username):
            reasons.append(("format_violation", "*"))

        counts = ref_script_counts(username)
        if sum(1 for v in counts.values() if v > 0) >= 2:
            composition = "+".join(
                s for s in ("latin", "cyrillic", "other") if counts[s] > 0
            )
            reasons.append(("mixed_script", composition))

        normalized = ref_normalize(username)
        folded = ref_fold(normalized, fold_entries)
        for offset, term in naive_scan(folded, [t for t, _ in prohibited]):
            reasons.append(("prohibited_content", f"{term}@{offset}"))
            severity = dict(prohibited)[term]
            if severity == "reject":
                fatal = True

        if normalized in blacklist:
            reasons.append(("blacklisted", normalized))
            fatal = True
        elif folded in blacklist:
            reasons.append(("blacklisted", folded))
            fatal = True

        skeleton = ref_fold(normalized, fold_entries)
        dup_ids = [rid for rid, raw in registry if ref_fold(ref_normalize(raw), fold_entries) == skeleton]
        if dup_ids:
            reasons.append(("duplicate", ";".join(dup_ids)))

    if email is not None and not ref_email_valid(email):
        reasons.append(("invalid_contact", "*"))

    if not reasons:
        return "accept", []
    return ("reject" if fatal else "require_correction"), reasons


def ref_round_percent(count: int, total: int) -> int:
    """Nearest-integer percent, ties away from zero, via fractions."""
    from fractions import Fraction

    value = Fraction(100 * count, total)
    floor = value.numerator // value.denominator
    remainder = value - floor
    if remainder > Fraction(1, 2):
        return floor + 1
    if remainder < Fraction(1, 2):
        return floor
    return floor + 1  # positive ties round up == away from zero
