from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nameguard.model import ProhibitedTerm
from nameguard.stores import LexiconStores
from nameguard.textops import FoldTable, default_fold_table


@pytest.fixture
def fold_table() -> FoldTable:
    return default_fold_table()


@pytest.fixture
def stores(fold_table) -> LexiconStores:
    return LexiconStores(fold_table=fold_table)


@pytest.fixture
def stores_with_spam(stores) -> LexiconStores:
    stores.add_prohibited(ProhibitedTerm(term="spam"))
    return stores
