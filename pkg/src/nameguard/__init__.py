"""Username verification engine for online communities.

Verifies names against a First.Last grammar, confusable-aware lexicons
(prohibited content, blacklist, registry), runs the moderation workflow and
computes management metrics. Exposed as a library, CLI and HTTP service.
"""

from nameguard.metrics import (
    Category,
    ClassificationReport,
    EfficiencyInput,
    classify_accounts,
    efficiency,
)
from nameguard.model import (
    Account,
    AccountStatus,
    AnonymityClass,
    BlacklistEntry,
    ContactEntry,
    ContactKind,
    Decision,
    Deviation,
    Flag,
    ModerationReport,
    ProhibitedTerm,
    Reason,
    ReasonCode,
    ScriptReport,
    Script,
    Severity,
    TermSeverity,
    UsernameRecord,
    Verdict,
    reason_severity,
)
from nameguard.pipeline import (
    RegistrationRequest,
    apply_sanction,
    generate_report,
    post_registration_scan,
    register,
    set_account_status,
    verify,
)
from nameguard.stores import (
    LexiconStores,
    StoreSnapshot,
    TermMatch,
    find_duplicates,
    is_blacklisted,
    load,
    make_username_record,
    match_prohibited,
    save,
)
from nameguard.textops import (
    ContactCheck,
    FoldTable,
    FormatParse,
    TokenRules,
    confusable_fold,
    default_fold_table,
    detect_script,
    load_fold_table,
    normalize,
    parse_format,
    validate_contact,
)

__version__ = "0.1.0"
