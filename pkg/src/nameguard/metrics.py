"""Effectiveness indicator and the five-category account classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from nameguard.errors import EfficiencyUndefinedError
from nameguard.model import Account, AccountStatus


@dataclass(frozen=True)
class EfficiencyInput:
    n_verified: int
    n_low_adequacy: int

    def __post_init__(self) -> None:
        if self.n_verified < 0 or self.n_low_adequacy < 0:
            raise ValueError("counts must be non-negative")
        if self.n_low_adequacy > self.n_verified:
            raise ValueError("low-adequacy count cannot exceed the verified count")


def efficiency(inputs: EfficiencyInput) -> float:
    """verified / (verified - low_adequacy); undefined when the counts are equal."""
    if inputs.n_verified == inputs.n_low_adequacy:
        raise EfficiencyUndefinedError(
            "efficiency is undefined when the low-adequacy count equals the verified count"
        )
    return inputs.n_verified / (inputs.n_verified - inputs.n_low_adequacy)


class Category(Enum):
    RELIABLE = "reliable"
    UPDATED = "updated"
    UPDATED_KEPT_NAME = "updated_kept_name"
    BLOCKED = "blocked"
    UNDER_MODERATION = "under_moderation"


_STATUS_TO_CATEGORY = {
    AccountStatus.VERIFIED: Category.RELIABLE,
    AccountStatus.CORRECTED: Category.UPDATED,
    AccountStatus.CORRECTED_KEPT_NAME: Category.UPDATED_KEPT_NAME,
    AccountStatus.BLOCKED: Category.BLOCKED,
    AccountStatus.UNDER_MODERATION: Category.UNDER_MODERATION,
}


def _round_percent(count: int, total: int) -> int:
    # Nearest integer, ties away from zero; exact in integer arithmetic.
    return (200 * count + total) // (2 * total)


@dataclass(frozen=True)
class ClassificationReport:
    total: int
    counts: tuple[tuple[Category, int], ...]
    percentages: tuple[tuple[Category, int], ...]

    def count(self, category: Category) -> int:
        return dict(self.counts)[category]

    def percentage(self, category: Category) -> int:
        return dict(self.percentages)[category]


def classify_accounts(accounts: list[Account] | tuple[Account, ...]) -> ClassificationReport:
    """Project account statuses onto the five report categories.

    Categories partition the account set; percentages are rounded to the
    nearest integer and reported next to the exact counts.
    """
    if not accounts:
        raise ValueError("cannot classify an empty account set; percentages are undefined")
    totals = {category: 0 for category in Category}
    for account in accounts:
        totals[_STATUS_TO_CATEGORY[account.status]] += 1
    total = len(accounts)
    counts = tuple((category, totals[category]) for category in Category)
    percentages = tuple(
        (category, _round_percent(totals[category], total)) for category in Category
    )
    return ClassificationReport(total=total, counts=counts, percentages=percentages)
