from __future__ import annotations

import pytest

from nameguard.model import (
    Account,
    AccountStatus,
    AnonymityClass,
    ContactEntry,
    ContactKind,
    Decision,
    Reason,
    ReasonCode,
    Severity,
    Verdict,
    anonymity_class_for_level,
    reason_severity,
)


def test_every_reason_code_has_exactly_one_severity():
    for code in ReasonCode:
        assert reason_severity(code) in (Severity.FATAL, Severity.CORRECTABLE)


def test_blacklisted_is_fatal():
    assert reason_severity(ReasonCode.BLACKLISTED) is Severity.FATAL


def test_prohibited_content_is_fatal():
    assert reason_severity(ReasonCode.PROHIBITED_CONTENT) is Severity.FATAL


def test_format_violation_is_correctable():
    assert reason_severity(ReasonCode.FORMAT_VIOLATION) is Severity.CORRECTABLE


def test_duplicate_is_correctable():
    assert reason_severity(ReasonCode.DUPLICATE) is Severity.CORRECTABLE


@pytest.mark.parametrize(
    "code",
    [ReasonCode.MISSING_FIELD, ReasonCode.MIXED_SCRIPT, ReasonCode.INVALID_CONTACT],
)
def test_remaining_codes_are_correctable(code):
    assert reason_severity(code) is Severity.CORRECTABLE


class TestVerdict:
    def test_accept_cannot_carry_reasons(self):
        with pytest.raises(ValueError):
            Verdict(Decision.ACCEPT, (Reason(ReasonCode.MISSING_FIELD, "username"),))

    def test_reject_requires_reasons(self):
        with pytest.raises(ValueError):
            Verdict(Decision.REJECT, ())

    def test_from_reasons_empty_is_accept(self):
        assert Verdict.from_reasons(()).decision is Decision.ACCEPT

    def test_from_reasons_fatal_rejects(self):
        verdict = Verdict.from_reasons((Reason(ReasonCode.BLACKLISTED, "x"),))
        assert verdict.decision is Decision.REJECT

    def test_from_reasons_correctable_requires_correction(self):
        verdict = Verdict.from_reasons((Reason(ReasonCode.DUPLICATE, "some-id"),))
        assert verdict.decision is Decision.REQUIRE_CORRECTION


class TestReason:
    @pytest.mark.parametrize(
        "code",
        [ReasonCode.PROHIBITED_CONTENT, ReasonCode.BLACKLISTED, ReasonCode.DUPLICATE],
    )
    def test_detail_required(self, code):
        with pytest.raises(ValueError):
            Reason(code, "")

    def test_detail_optional_for_others(self):
        assert Reason(ReasonCode.MISSING_FIELD, "").detail == ""


class TestAnonymity:
    @pytest.mark.parametrize(
        "level,expected",
        [
            (0, AnonymityClass.ANONYMOUS),
            (1, AnonymityClass.PARTIALLY_ANONYMOUS),
            (2, AnonymityClass.PARTIALLY_ANONYMOUS),
            (3, AnonymityClass.IDENTIFIED),
        ],
    )
    def test_class_from_level(self, level, expected):
        assert anonymity_class_for_level(level) is expected

    def test_account_derives_class(self):
        account = Account(
            id="a1",
            username_id="u1",
            anonymity_level=2,
            contacts=(ContactEntry(ContactKind.EMAIL, "a@b.co", verified=True),),
            registered_at=0,
            status=AccountStatus.UNDER_MODERATION,
        )
        assert account.anonymity_class is AnonymityClass.PARTIALLY_ANONYMOUS


def test_contact_entry_rejects_empty_value():
    with pytest.raises(ValueError):
        ContactEntry(ContactKind.EMAIL, "")
