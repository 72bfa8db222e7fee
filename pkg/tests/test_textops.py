from __future__ import annotations

import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nameguard.model import Script
from nameguard.textops import (
    FoldTable,
    confusable_fold,
    default_fold_table,
    detect_script,
    normalize,
    parse_fold_table,
    parse_format,
    validate_contact,
)
from oracles import ref_normalize

# Characters the fuzz corpora draw from: plain ASCII, Cyrillic, fullwidth,
# leet symbols, whitespace variants and compatibility-expanding oddballs.
FUZZ_ALPHABET = (
    "abcXYZ.-'"
    "іІаЯё"
    "ＡｊＪ０"
    "0134@$!|+"
    " \t 　"
    "…․ﬁİßΩ゛"
)


class TestNormalize:
    def test_plain_lowercase(self):
        assert normalize("John.Smith") == "john.smith"

    def test_fullwidth_compatibility_decomposition(self):
        # U+FF2A decomposes to ASCII J under NFKD, then lowercases.
        assert unicodedata.normalize("NFKD", "Ｊ") == "J"
        assert normalize("Ｊohn.Smith") == "john.smith"

    def test_trim_and_cyrillic_lowercase(self):
        assert normalize("  Іван.Петренко ") == (
            "іван.петренко"
        )

    def test_whitespace_runs_collapse_to_dot(self):
        assert normalize("ivan  petrenko") == "ivan.petrenko"
        assert normalize("a \t b") == "a.b"

    def test_empty_input(self):
        assert normalize("") == ""
        assert normalize("   ") == ""

    @given(st.text(alphabet=FUZZ_ALPHABET, max_size=24))
    def test_idempotent_on_fuzz_alphabet(self, s):
        assert normalize(normalize(s)) == normalize(s)

    @given(st.text(max_size=24))
    @settings(max_examples=300)
    def test_idempotent_on_arbitrary_unicode(self, s):
        assert normalize(normalize(s)) == normalize(s)

    @given(st.text(max_size=24))
    def test_matches_reference_pipeline(self, s):
        assert normalize(s) == ref_normalize(s)

    @given(st.text(alphabet=FUZZ_ALPHABET, max_size=24))
    def test_dot_count_bounded_by_decomposed_dots_plus_ws_runs(self, s):
        import re

        decomposed = unicodedata.normalize("NFKD", s.strip()).lower().strip()
        ws_runs = len(re.findall(r"\s+", decomposed))
        assert normalize(s).count(".") <= decomposed.count(".") + ws_runs


class TestConfusableFold:
    def test_leet_digits(self):
        table = FoldTable({"0": "o", "1": "i"})
        assert confusable_fold("j0hn.sm1th", table) == "john.smith"

    def test_cyrillic_i(self):
        table = FoldTable({"і": "i"})
        assert confusable_fold("іvan.petrenko", table) == "ivan.petrenko"

    def test_empty_table_is_identity(self):
        assert confusable_fold("john.smith", FoldTable({})) == "john.smith"

    def test_shipped_tables_cover_spec_examples(self):
        table = default_fold_table()
        assert confusable_fold("j0hn.sm1th", table) == "john.smith"
        assert confusable_fold("іvan.petrenko", table) == "ivan.petrenko"
        assert confusable_fold("sp4m", table) == "spam"

    @given(st.text(alphabet=FUZZ_ALPHABET, max_size=24))
    def test_shipped_tables_are_fold_stable(self, s):
        table = default_fold_table()
        once = confusable_fold(s, table)
        assert confusable_fold(once, table) == once

    def test_fold_table_rejects_multichar_keys(self):
        with pytest.raises(ValueError):
            FoldTable({"ab": "x"})


class TestFoldTableParsing:
    def test_parses_entries_and_comments(self):
        table = parse_fold_table("# comment\n0030\to\n\n0456\ti\n")
        assert table.entries == {"0": "o", "і": "i"}

    def test_bad_field_count(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_fold_table("0030\to\n0031 i\n")

    def test_bad_codepoint(self):
        with pytest.raises(ValueError, match="bad codepoint"):
            parse_fold_table("zzzz\to\n")

    def test_merge_right_side_wins(self):
        merged = FoldTable({"0": "o"}).merged_with(FoldTable({"0": "q", "1": "i"}))
        assert merged.entries == {"0": "q", "1": "i"}


class TestParseFormat:
    def test_canonical_name(self):
        parse = parse_format("Ivan.Petrenko")
        assert parse.valid
        assert (parse.first, parse.last) == ("Ivan", "Petrenko")
        assert parse.violation is None

    def test_space_separator_mentions_separator(self):
        parse = parse_format("ivan petrenko")
        assert not parse.valid
        assert "separator" in parse.violation

    def test_hyphen_and_apostrophe_tokens(self):
        parse = parse_format("Anna-Maria.O'Neil")
        assert parse.valid
        assert (parse.first, parse.last) == ("Anna-Maria", "O'Neil")

    def test_double_dot_mentions_empty_token(self):
        parse = parse_format("Ivan..Petrenko")
        assert not parse.valid
        assert "empty" in parse.violation

    def test_missing_separator(self):
        assert not parse_format("IvanPetrenko").valid

    def test_leading_dot(self):
        assert not parse_format(".Petrenko").valid

    def test_token_too_short(self):
        parse = parse_format("I.Petrenko")
        assert not parse.valid
        assert "shorter" in parse.violation

    def test_token_too_long(self):
        assert not parse_format("A" * 33 + ".Petrenko").valid

    def test_token_must_start_with_letter(self):
        assert not parse_format("1van.Petrenko").valid
        assert not parse_format("'van.Petrenko").valid

    def test_disallowed_character(self):
        parse = parse_format("Iv@n.Petrenko")
        assert not parse.valid
        assert "disallowed" in parse.violation

    def test_empty_input(self):
        assert not parse_format("").valid

    def test_valid_means_no_violation_and_nonempty_tokens(self):
        parse = parse_format("Ivan.Petrenko")
        assert parse.valid and parse.violation is None and parse.first and parse.last

    @given(st.text(alphabet="abIP .-'і", max_size=16))
    def test_accepted_names_have_one_interior_dot_and_no_whitespace(self, s):
        parse = parse_format(s)
        if parse.valid:
            assert s.count(".") == 1
            assert not s.startswith(".") and not s.endswith(".")
            assert not any(ch.isspace() for ch in s)


class TestDetectScript:
    def test_all_latin(self):
        report = detect_script("Ivan.Petrenko")
        assert report.dominant is Script.LATIN
        assert not report.mixed

    def test_all_cyrillic(self):
        report = detect_script("Іван.Петренко")
        assert report.dominant is Script.CYRILLIC
        assert not report.mixed

    def test_single_cyrillic_lookalike_in_latin_name(self):
        # U+0406 is one Cyrillic letter among eleven Latin ones.
        report = detect_script("Іvan.Petrenko")
        assert report.dominant is Script.LATIN
        assert report.mixed
        assert report.count(Script.LATIN) == 11
        assert report.count(Script.CYRILLIC) == 1

    def test_tie_breaks_to_latin(self):
        report = detect_script("abаб")
        assert report.count(Script.LATIN) == report.count(Script.CYRILLIC) == 2
        assert report.dominant is Script.LATIN

    def test_no_letters(self):
        report = detect_script("12.34!")
        assert report.dominant is Script.NONE
        assert not report.mixed
        assert report.per_script_counts == ()

    def test_greek_pools_to_other(self):
        report = detect_script("αβ")
        assert report.dominant is Script.OTHER

    @given(st.text(alphabet="abабα.", max_size=12))
    def test_equal_latin_cyrillic_always_latin(self, s):
        report = detect_script(s)
        if report.count(Script.LATIN) == report.count(Script.CYRILLIC) > 0:
            if report.count(Script.OTHER) <= report.count(Script.LATIN):
                assert report.dominant is Script.LATIN


class TestValidateContact:
    def test_minimal_valid(self):
        assert validate_contact("a@b.co").valid

    def test_whitespace_invalid(self):
        check = validate_contact("a b@c.d")
        assert not check.valid
        assert "whitespace" in check.violation

    def test_missing_domain_dot(self):
        check = validate_contact("a@b")
        assert not check.valid
        assert "." in check.violation

    def test_two_at_signs(self):
        assert not validate_contact("a@b@c.d").valid

    def test_empty_local_part(self):
        assert not validate_contact("@b.co").valid

    def test_empty_domain_label(self):
        assert not validate_contact("a@b..co").valid
        assert not validate_contact("a@.co").valid
        assert not validate_contact("a@co.").valid

    def test_length_cap(self):
        assert not validate_contact("a" * 250 + "@b.co").valid  # 255 chars
        assert validate_contact("a" * 249 + "@b.co").valid  # exactly 254
