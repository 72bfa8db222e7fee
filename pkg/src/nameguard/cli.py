"""Command-line interface.

Exit codes: verify maps its verdict to 0/1/2; usage problems exit 64 and I/O
failures exit 74; everything else exits 0 on success.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from nameguard import metrics as metrics_mod
from nameguard import pipeline, stores as stores_mod
from nameguard.errors import (
    EfficiencyUndefinedError,
    NameguardError,
    NotFoundError,
    StoreFormatError,
)
from nameguard.model import AccountStatus, BlacklistEntry, Decision, ProhibitedTerm, TermSeverity
from nameguard.service import ServiceConfig, serve
from nameguard.textops import FoldTable, default_fold_table, load_fold_table, normalize

EX_USAGE = 64
EX_IOERR = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2; we want 64
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nameguard", description="Username verification engine")
    parser.add_argument(
        "--data",
        default=None,
        help="data directory (default: $NAMEGUARD_DATA or in-memory empty stores)",
    )
    parser.add_argument(
        "--fold-table",
        action="append",
        default=None,
        metavar="FILE",
        help="fold table file; repeatable, replaces the packaged tables",
    )
    sub = parser.add_subparsers(dest="command")

    p_verify = sub.add_parser("verify", help="verify one name; exit 0 accept, 1 correction, 2 reject")
    p_verify.add_argument("name")
    p_verify.add_argument("--email", default=None)

    p_batch = sub.add_parser("batch", help="verify names from a file, one per line, TSV output")
    p_batch.add_argument("file")

    sub.add_parser("scan", help="re-check all accounts and print new flags")

    p_report = sub.add_parser("report", help="classification and efficiency summary")
    p_report.add_argument("--json", action="store_true", dest="as_json")

    p_db = sub.add_parser("db", help="administrate the lexicon databases")
    db_sub = p_db.add_subparsers(dest="db_command")
    p_addp = db_sub.add_parser("add-prohibited")
    p_addp.add_argument("term")
    p_addp.add_argument("--category", default="")
    p_addp.add_argument("--severity", choices=["reject", "flag"], default="reject")
    p_rmp = db_sub.add_parser("rm-prohibited")
    p_rmp.add_argument("term")
    p_addb = db_sub.add_parser("add-blacklist")
    p_addb.add_argument("name")
    p_addb.add_argument("--reason", default="")
    db_sub.add_parser("list")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--admin-token", default=os.environ.get("NAMEGUARD_ADMIN_TOKEN"))
    p_serve.add_argument("--warn-webhook", default=os.environ.get("NAMEGUARD_WARN_WEBHOOK"))

    return parser


def _fold_table(args) -> FoldTable:
    if not args.fold_table:
        return default_fold_table()
    table = FoldTable({})
    for path in args.fold_table:
        table = table.merged_with(load_fold_table(path))
    return table


def _data_dir(args) -> Path | None:
    data = args.data or os.environ.get("NAMEGUARD_DATA")
    return Path(data) if data else None


def _open_stores(args) -> stores_mod.LexiconStores:
    directory = _data_dir(args)
    table = _fold_table(args)
    if directory is not None and directory.exists():
        return stores_mod.load(directory, fold_table=table)
    return stores_mod.LexiconStores(fold_table=table)


def _save_if_persistent(stores: stores_mod.LexiconStores, args) -> None:
    directory = _data_dir(args)
    if directory is not None:
        stores_mod.save(stores, directory)


def _verdict_line(name: str, verdict) -> str:
    codes = [r.code.value for r in verdict.reasons]
    return " ".join([verdict.decision.value] + codes)


_DECISION_EXIT = {Decision.ACCEPT: 0, Decision.REQUIRE_CORRECTION: 1, Decision.REJECT: 2}


def _cmd_verify(args) -> int:
    stores = _open_stores(args)
    req = pipeline.RegistrationRequest(username=args.name, email=args.email)
    verdict = pipeline.verify(req, stores.snapshot())
    print(_verdict_line(args.name, verdict))
    return _DECISION_EXIT[verdict.decision]


def _cmd_batch(args) -> int:
    try:
        lines = Path(args.file).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return EX_IOERR
    stores = _open_stores(args)
    snapshot = stores.snapshot()
    for name in lines:
        if not name:
            continue
        verdict = pipeline.verify(pipeline.RegistrationRequest(username=name), snapshot)
        reasons = ";".join(f"{r.code.value}:{r.detail}" for r in verdict.reasons)
        print(f"{name}\t{verdict.decision.value}\t{reasons}")
    return 0


def _cmd_scan(args) -> int:
    stores = _open_stores(args)
    flags = pipeline.post_registration_scan(stores)
    report = pipeline.generate_report(flags)
    for code, n in report.counts:
        if n:
            print(f"{code.value}\t{n}")
    for _, bucket in report.groups:
        for flag in bucket:
            reasons = ";".join(f"{r.code.value}:{r.detail}" for r in flag.reasons)
            print(f"{flag.account_id}\t{reasons}")
    print(f"new flags: {len(flags)}")
    return 0


def _cmd_report(args) -> int:
    stores = _open_stores(args)
    snapshot = stores.snapshot()
    accounts = list(snapshot.accounts.values())
    flagged = stores.accounts_with_open_flags()
    n_low = sum(
        1 for a in accounts if a.status is AccountStatus.UNDER_MODERATION or a.id in flagged
    )
    efficiency_value: float | None = None
    if accounts and n_low != len(accounts):
        efficiency_value = metrics_mod.efficiency(
            metrics_mod.EfficiencyInput(n_verified=len(accounts), n_low_adequacy=n_low)
        )
    if not accounts:
        if args.as_json:
            print(json.dumps({"total": 0, "counts": {}, "percentages": {}, "efficiency": None}))
        else:
            print("no accounts")
        return 0
    report = metrics_mod.classify_accounts(accounts)
    if args.as_json:
        print(
            json.dumps(
                {
                    "total": report.total,
                    "counts": {c.value: n for c, n in report.counts},
                    "percentages": {c.value: p for c, p in report.percentages},
                    "efficiency": efficiency_value,
                },
                ensure_ascii=False,
            )
        )
        return 0
    print(f"total\t{report.total}")
    for category, n in report.counts:
        print(f"{category.value}\t{n}\t{report.percentage(category)}%")
    if efficiency_value is None:
        print("efficiency\tundefined")
    else:
        print(f"efficiency\t{efficiency_value:.6g}")
    return 0


def _cmd_db(args) -> int:
    if args.db_command is None:
        raise UsageError("db requires a subcommand: add-prohibited, rm-prohibited, add-blacklist, list")
    stores = _open_stores(args)
    if args.db_command == "add-prohibited":
        term = normalize(args.term)
        if not term:
            raise UsageError("term is empty after normalization")
        stores.add_prohibited(
            ProhibitedTerm(term=term, category=args.category, severity=TermSeverity(args.severity))
        )
        _save_if_persistent(stores, args)
        print(f"added {term}")
    elif args.db_command == "rm-prohibited":
        stores.remove_prohibited(normalize(args.term))
        _save_if_persistent(stores, args)
        print(f"removed {args.term}")
    elif args.db_command == "add-blacklist":
        name = normalize(args.name)
        if not name:
            raise UsageError("name is empty after normalization")
        stores.add_blacklist(
            BlacklistEntry(
                normalized_name=name,
                sanction_code=4,
                reason=args.reason,
                created_at=int(time.time()),
            )
        )
        _save_if_persistent(stores, args)
        print(f"added {name}")
    elif args.db_command == "list":
        snapshot = stores.snapshot()
        for term in sorted(snapshot.prohibited):
            entry = snapshot.prohibited[term]
            print(f"prohibited\t{term}\t{entry.category}\t{entry.severity.value}")
        for name in sorted(snapshot.blacklist):
            entry = snapshot.blacklist[name]
            print(f"blacklist\t{name}\t{entry.sanction_code}\t{entry.reason}")
    else:
        raise UsageError(f"unknown db subcommand {args.db_command!r}")
    return 0


def _cmd_serve(args) -> int:
    directory = _data_dir(args)
    config = ServiceConfig(
        data_dir=directory,
        fold_table_paths=tuple(args.fold_table or ()),
        admin_token=args.admin_token,
        warning_webhook=args.warn_webhook,
    )
    serve(config, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        handler = {
            "verify": _cmd_verify,
            "batch": _cmd_batch,
            "scan": _cmd_scan,
            "report": _cmd_report,
            "db": _cmd_db,
            "serve": _cmd_serve,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EX_USAGE
    except StoreFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_IOERR
    except NotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_IOERR
    except EfficiencyUndefinedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NameguardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
