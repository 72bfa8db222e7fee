"""HTTP gateway: verification, registration, moderation and metrics over JSON.

All store writes funnel through the single-writer store contract; every
request handler reads one consistent snapshot.
"""

from __future__ import annotations

import logging
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

import httpx
from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from nameguard import metrics as metrics_mod
from nameguard import pipeline, stores as stores_mod
from nameguard.errors import (
    ConflictError,
    EfficiencyUndefinedError,
    InvalidStateError,
    NotFoundError,
    StoreFormatError,
)
from nameguard.model import (
    Account,
    AccountStatus,
    BlacklistEntry,
    ContactEntry,
    ContactKind,
    Flag,
    ProhibitedTerm,
    ReasonCode,
    TermSeverity,
    UsernameRecord,
    Verdict,
)
from nameguard.textops import FoldTable, default_fold_table, load_fold_table, normalize

logger = logging.getLogger("nameguard.service")


@dataclass
class ServiceConfig:
    data_dir: Path | None = None
    fold_table_paths: tuple[str, ...] = ()
    admin_token: str | None = None
    warning_webhook: str | None = None


def _resolve_fold_table(config: ServiceConfig) -> FoldTable:
    if not config.fold_table_paths:
        return default_fold_table()
    table = FoldTable({})
    for path in config.fold_table_paths:
        table = table.merged_with(load_fold_table(path))
    return table


def open_stores(config: ServiceConfig) -> stores_mod.LexiconStores:
    fold_table = _resolve_fold_table(config)
    if config.data_dir is not None and Path(config.data_dir).exists():
        return stores_mod.load(config.data_dir, fold_table=fold_table)
    return stores_mod.LexiconStores(fold_table=fold_table)


# -- wire schemas ---------------------------------------------------------


class ContactIn(BaseModel):
    kind: str = "other"
    value: str
    verified: bool = False


class VerifyIn(BaseModel):
    username: str = ""
    email: str | None = None


class RegisterIn(BaseModel):
    username: str = ""
    email: str | None = None
    contacts: list[ContactIn] = Field(default_factory=list)


class SanctionIn(BaseModel):
    account_id: str
    sanction_code: int
    rule_code: str = ReasonCode.PROHIBITED_CONTENT.value
    note: str = ""


class StatusIn(BaseModel):
    status: str


class ProhibitedIn(BaseModel):
    term: str
    category: str = ""
    severity: str = TermSeverity.REJECT.value


class BlacklistIn(BaseModel):
    name: str
    reason: str = ""


def _verdict_json(verdict: Verdict) -> dict:
    return {
        "decision": verdict.decision.value,
        "reasons": [{"code": r.code.value, "detail": r.detail} for r in verdict.reasons],
    }


def _account_json(account: Account, record: UsernameRecord | None) -> dict:
    return {
        "id": account.id,
        "username_id": account.username_id,
        "raw": record.raw if record else None,
        "normalized": record.normalized if record else None,
        "anonymity_level": account.anonymity_level,
        "anonymity_class": account.anonymity_class.value,
        "status": account.status.value,
        "registered_at": account.registered_at,
        "contacts": [{"kind": c.kind.value, "value": c.value} for c in account.contacts],
    }


def _record_json(record: UsernameRecord) -> dict:
    return {
        "id": record.id,
        "raw": record.raw,
        "normalized": record.normalized,
        "skeleton": record.skeleton,
        "script": record.script.dominant.value,
        "mixed_script": record.script.mixed,
        "created_at": record.created_at,
    }


def _flag_json(flag: Flag, snapshot: stores_mod.StoreSnapshot) -> dict:
    account = snapshot.accounts.get(flag.account_id)
    record = snapshot.registry.get(account.username_id) if account else None
    return {
        "account_id": flag.account_id,
        "reasons": [{"code": r.code.value, "detail": r.detail} for r in flag.reasons],
        "detected_at": flag.detected_at,
        "store_revision": flag.store_revision,
        "account": {
            "id": account.id if account else flag.account_id,
            "raw": record.raw if record else None,
            "status": account.status.value if account else None,
        },
    }


def _api_error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.stores = open_stores(config)
        yield
        if config.data_dir is not None:
            stores_mod.save(app.state.stores, config.data_dir)

    app = FastAPI(title="nameguard", lifespan=lifespan)
    app.state.config = config

    def get_stores() -> stores_mod.LexiconStores:
        return app.state.stores

    def require_admin(x_admin_token: str | None = Header(default=None)) -> None:
        if config.admin_token is not None and x_admin_token != config.admin_token:
            raise _api_error(400, "bad_admin_token", "missing or wrong admin token")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"status": 400, "code": "bad_request", "message": str(exc.errors()[:1])},
        )

    @app.exception_handler(HTTPException)
    async def http_handler(request: Request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"code": "error", "message": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content={"status": exc.status_code, **detail})

    @app.exception_handler(NotFoundError)
    async def notfound_handler(request: Request, exc: NotFoundError):
        return JSONResponse(
            status_code=404, content={"status": 404, "code": "account_not_found", "message": str(exc)}
        )

    @app.exception_handler(ConflictError)
    async def conflict_handler(request: Request, exc: ConflictError):
        return JSONResponse(status_code=409, content={"status": 409, "code": "conflict", "message": str(exc)})

    @app.exception_handler(InvalidStateError)
    async def state_handler(request: Request, exc: InvalidStateError):
        return JSONResponse(
            status_code=409, content={"status": 409, "code": "invalid_state", "message": str(exc)}
        )

    @app.exception_handler(ValueError)
    async def value_handler(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422, content={"status": 422, "code": "invalid_value", "message": str(exc)}
        )

    # -- verification -----------------------------------------------------

    @app.post("/api/verify")
    def api_verify(body: VerifyIn, stores: stores_mod.LexiconStores = Depends(get_stores)):
        req = pipeline.RegistrationRequest(username=body.username, email=body.email)
        verdict = pipeline.verify(req, stores.snapshot())
        return _verdict_json(verdict)

    @app.post("/api/register")
    def api_register(body: RegisterIn, stores: stores_mod.LexiconStores = Depends(get_stores)):
        contacts = tuple(
            ContactEntry(kind=ContactKind(c.kind), value=c.value, verified=c.verified)
            for c in body.contacts
        )
        req = pipeline.RegistrationRequest(
            username=body.username, email=body.email, extra_contacts=contacts
        )
        outcome = pipeline.register(req, stores)
        if isinstance(outcome, Verdict):
            return {
                "registered": False,
                "verdict": _verdict_json(outcome),
                "revision": stores.revision,
            }
        account, record = outcome
        return {
            "registered": True,
            "verdict": {"decision": "accept", "reasons": []},
            "account": _account_json(account, record),
            "username": _record_json(record),
            "revision": stores.revision,
        }

    # -- accounts and moderation -------------------------------------------

    @app.get("/api/accounts")
    def api_accounts(status: str | None = None, stores: stores_mod.LexiconStores = Depends(get_stores)):
        snapshot = stores.snapshot()
        wanted: AccountStatus | None = None
        if status is not None:
            try:
                wanted = AccountStatus(status)
            except ValueError:
                raise _api_error(422, "unknown_status", f"unknown status {status!r}") from None
        accounts = []
        for account_id in sorted(snapshot.accounts):
            account = snapshot.accounts[account_id]
            if wanted is not None and account.status is not wanted:
                continue
            accounts.append(_account_json(account, snapshot.registry.get(account.username_id)))
        return {"accounts": accounts, "revision": snapshot.revision}

    @app.get("/api/flags")
    def api_flags(stores: stores_mod.LexiconStores = Depends(get_stores)):
        snapshot = stores.snapshot()
        open_flags = stores.open_flags()
        report = pipeline.generate_report(open_flags)
        return {
            "generated_at": report.generated_at,
            "counts": {code.value: n for code, n in report.counts},
            "flags": [
                _flag_json(flag, snapshot)
                for _, bucket in report.groups
                for flag in bucket
            ],
            "revision": snapshot.revision,
        }

    @app.post("/api/scan")
    def api_scan(
        stores: stores_mod.LexiconStores = Depends(get_stores), _: None = Depends(require_admin)
    ):
        snapshot_before = stores.snapshot()
        new_flags = pipeline.post_registration_scan(stores)
        return {
            "new_flags": len(new_flags),
            "flags": [_flag_json(f, snapshot_before) for f in new_flags],
            "revision": stores.revision,
        }

    @app.post("/api/sanctions")
    def api_sanctions(
        body: SanctionIn,
        stores: stores_mod.LexiconStores = Depends(get_stores),
        _: None = Depends(require_admin),
    ):
        try:
            rule_code = ReasonCode(body.rule_code)
        except ValueError:
            raise _api_error(422, "unknown_rule_code", f"unknown rule code {body.rule_code!r}") from None
        deviation = pipeline.apply_sanction(
            stores, body.account_id, body.sanction_code, rule_code, body.note
        )
        account = stores.get_account(body.account_id)
        record = stores.get_record(account.username_id) if account else None
        if body.sanction_code == 1 and config.warning_webhook:
            _post_warning(config.warning_webhook, deviation)
        return {
            "deviation": {
                "id": deviation.id,
                "account_id": deviation.account_id,
                "rule_code": deviation.rule_code.value,
                "sanction_code": deviation.sanction_code,
                "note": deviation.note,
                "created_at": deviation.created_at,
            },
            "account": _account_json(account, record) if account else None,
            "revision": stores.revision,
        }

    @app.post("/api/accounts/{account_id}/status")
    def api_set_status(
        account_id: str,
        body: StatusIn,
        stores: stores_mod.LexiconStores = Depends(get_stores),
        _: None = Depends(require_admin),
    ):
        try:
            status = AccountStatus(body.status)
        except ValueError:
            raise _api_error(422, "unknown_status", f"unknown status {body.status!r}") from None
        account = pipeline.set_account_status(stores, account_id, status)
        record = stores.get_record(account.username_id)
        return {"account": _account_json(account, record), "revision": stores.revision}

    # -- lexicon administration ---------------------------------------------

    @app.get("/api/prohibited")
    def api_prohibited_list(stores: stores_mod.LexiconStores = Depends(get_stores)):
        snapshot = stores.snapshot()
        return {
            "terms": [
                {"term": t.term, "category": t.category, "severity": t.severity.value}
                for t in sorted(snapshot.prohibited.values(), key=lambda t: t.term)
            ],
            "revision": snapshot.revision,
        }

    @app.post("/api/prohibited")
    def api_prohibited_add(
        body: ProhibitedIn,
        stores: stores_mod.LexiconStores = Depends(get_stores),
        _: None = Depends(require_admin),
    ):
        try:
            severity = TermSeverity(body.severity)
        except ValueError:
            raise _api_error(422, "unknown_severity", f"unknown severity {body.severity!r}") from None
        term = normalize(body.term)
        if not term:
            raise _api_error(422, "empty_term", "term is empty after normalization")
        revision = stores.add_prohibited(
            ProhibitedTerm(term=term, category=body.category, severity=severity)
        )
        return {"term": term, "revision": revision}

    @app.delete("/api/prohibited/{term}")
    def api_prohibited_remove(
        term: str,
        stores: stores_mod.LexiconStores = Depends(get_stores),
        _: None = Depends(require_admin),
    ):
        try:
            revision = stores.remove_prohibited(normalize(term))
        except NotFoundError as exc:
            raise _api_error(404, "term_not_found", str(exc)) from None
        return {"removed": term, "revision": revision}

    @app.get("/api/blacklist")
    def api_blacklist_list(stores: stores_mod.LexiconStores = Depends(get_stores)):
        snapshot = stores.snapshot()
        return {
            "entries": [
                {
                    "name": e.normalized_name,
                    "sanction_code": e.sanction_code,
                    "reason": e.reason,
                    "created_at": e.created_at,
                }
                for e in sorted(snapshot.blacklist.values(), key=lambda e: e.normalized_name)
            ],
            "revision": snapshot.revision,
        }

    @app.post("/api/blacklist")
    def api_blacklist_add(
        body: BlacklistIn,
        stores: stores_mod.LexiconStores = Depends(get_stores),
        _: None = Depends(require_admin),
    ):
        name = normalize(body.name)
        if not name:
            raise _api_error(422, "empty_name", "name is empty after normalization")
        revision = stores.add_blacklist(
            BlacklistEntry(
                normalized_name=name,
                sanction_code=4,
                reason=body.reason,
                created_at=int(time.time()),
            )
        )
        return {"name": name, "revision": revision}

    @app.delete("/api/blacklist/{name}")
    def api_blacklist_remove(
        name: str,
        stores: stores_mod.LexiconStores = Depends(get_stores),
        _: None = Depends(require_admin),
    ):
        try:
            revision = stores.remove_blacklist(normalize(name))
        except NotFoundError as exc:
            raise _api_error(404, "entry_not_found", str(exc)) from None
        return {"removed": name, "revision": revision}

    # -- metrics --------------------------------------------------------------

    @app.get("/api/metrics/classification")
    def api_classification(stores: stores_mod.LexiconStores = Depends(get_stores)):
        snapshot = stores.snapshot()
        if not snapshot.accounts:
            return {"total": 0, "counts": {}, "percentages": {}, "revision": snapshot.revision}
        report = metrics_mod.classify_accounts(list(snapshot.accounts.values()))
        return {
            "total": report.total,
            "counts": {category.value: n for category, n in report.counts},
            "percentages": {category.value: p for category, p in report.percentages},
            "revision": snapshot.revision,
        }

    @app.get("/api/metrics/efficiency")
    def api_efficiency(
        low_adequacy: str = "auto", stores: stores_mod.LexiconStores = Depends(get_stores)
    ):
        snapshot = stores.snapshot()
        n_verified = len(snapshot.accounts)
        if low_adequacy == "auto":
            flagged = stores.accounts_with_open_flags()
            n_low = sum(
                1
                for a in snapshot.accounts.values()
                if a.status is AccountStatus.UNDER_MODERATION or a.id in flagged
            )
        else:
            try:
                n_low = int(low_adequacy)
            except ValueError:
                raise _api_error(
                    422, "bad_low_adequacy", "low_adequacy must be 'auto' or an integer"
                ) from None
        try:
            value = metrics_mod.efficiency(
                metrics_mod.EfficiencyInput(n_verified=n_verified, n_low_adequacy=n_low)
            )
        except EfficiencyUndefinedError as exc:
            raise _api_error(422, "efficiency_undefined", str(exc)) from None
        return {
            "n_verified": n_verified,
            "n_low_adequacy": n_low,
            "efficiency": value,
            "revision": snapshot.revision,
        }

    return app


def _post_warning(url: str, deviation) -> None:
    """Best-effort warning event; transport failures only log."""
    payload = {
        "event": "warning",
        "account_id": deviation.account_id,
        "rule_code": deviation.rule_code.value,
        "note": deviation.note,
        "created_at": deviation.created_at,
    }
    try:
        httpx.post(url, json=payload, timeout=2.0)
    except httpx.HTTPError as exc:
        logger.warning("warning webhook failed: %s", exc)


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the service until interrupted; flushes stores on graceful shutdown."""
    import uvicorn

    # Fail fast on an unloadable store before binding the port; the raised
    # StoreFormatError names the file and line.
    if config.data_dir is not None and Path(config.data_dir).exists():
        open_stores(config)
    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")
