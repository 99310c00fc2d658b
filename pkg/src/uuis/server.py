"""HTTP facade: sessions, the admin-computer allowlist, and the /api surface.

Every endpoint maps one-to-one onto a module operation and opens at most
one storage transaction; authorization is whatever the operation itself
enforces — there are no endpoint-local shortcuts. Errors render uniformly
as ``{"error": <code>, "detail": <text>}`` with the status mapping:
401 authentication, 403 permission, 404 missing, 408 query deadline,
409 state conflict, 422 validation.
"""

from __future__ import annotations

import ipaddress
import os
import threading
from datetime import datetime, timedelta
from pathlib import Path

from fastapi import Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import audit as audit_ops
from . import authz, inventory, orgs, reports, security, workflow
from .errors import (
    AccountInactive,
    AdminNetworkRequired,
    AuthenticationFailed,
    Conflict,
    IoFailure,
    NotFound,
    PermissionDenied,
    QueryTimeout,
    UuisError,
    ValidationFailed,
)
from .model import (
    AssetKind,
    PermissionAction,
    ReportKind,
    RequestForm,
    RequestKind,
    RequestLine,
    ReturnCondition,
    ScopedPermission,
    SearchMode,
    Session,
    UnitKind,
    User,
    record_to_doc,
)
from .reports import ReportSpec, SearchQuery
from .storage import Store


class ServerConfig:
    """Runtime knobs, all environment-configurable."""

    def __init__(self, *, session_ttl_seconds: int = 8 * 3600,
                 admin_cidrs: list[str] | None = None,
                 query_timeout_ms: float = reports.DEFAULT_DEADLINE_MS,
                 static_dir: str | Path | None = None):
        self.session_ttl_seconds = session_ttl_seconds
        self.admin_networks = [ipaddress.ip_network(c) for c in (admin_cidrs or [])]
        self.query_timeout_ms = query_timeout_ms
        self.static_dir = Path(static_dir) if static_dir else None

    @classmethod
    def from_env(cls) -> "ServerConfig":
        cidrs = [c.strip() for c in os.environ.get("UUIS_ADMIN_CIDRS", "").split(",")
                 if c.strip()]
        return cls(
            session_ttl_seconds=int(os.environ.get("UUIS_SESSION_TTL_SECONDS", 8 * 3600)),
            admin_cidrs=cidrs,
            query_timeout_ms=float(os.environ.get("UUIS_QUERY_TIMEOUT_MS",
                                                  reports.DEFAULT_DEADLINE_MS)),
            static_dir=os.environ.get("UUIS_STATIC_DIR") or None,
        )


class SessionManager:
    """In-memory bearer sessions; they do not survive a restart."""

    def __init__(self, store: Store, config: ServerConfig):
        self._store = store
        self._config = config
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def login(self, username: str, password: str, client_address: str) -> tuple[Session, User]:
        user = orgs.find_user_by_username(self._store.view(), username)
        # Same work and same message for unknown user and wrong password.
        digest = user.password_digest if user else security.dummy_digest()
        if not security.verify_password(password, digest) or user is None:
            raise AuthenticationFailed("invalid username or password")
        if not user.active:
            raise AccountInactive("account is deactivated")
        if user.level >= 1 and self._config.admin_networks:
            if not self._address_allowed(client_address):
                raise AdminNetworkRequired(
                    "administrative accounts must log in from an administration computer"
                )
        now = self._store.clock()
        session = Session(
            token=security.new_session_token(),
            user_id=user.id,
            created_at=now,
            expires_at=now + timedelta(seconds=self._config.session_ttl_seconds),
            client_address=client_address,
        )
        with self._lock:
            self._sessions[session.token] = session
        return session, user

    def _address_allowed(self, client_address: str) -> bool:
        try:
            address = ipaddress.ip_address(client_address)
        except ValueError:
            return False
        return any(address in network for network in self._config.admin_networks)

    def logout(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)

    def authenticate(self, token: str) -> Session:
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                raise AuthenticationFailed("unknown or expired session")
            if self._store.clock() >= session.expires_at:
                del self._sessions[token]
                raise AuthenticationFailed("unknown or expired session")
            return session


# --- request bodies -----------------------------------------------------------


class LoginBody(BaseModel):
    username: str
    password: str


class OrgUnitCreate(BaseModel):
    name: str
    kind: UnitKind
    parent_id: str | None = None


class OrgUnitPatch(BaseModel):
    name: str


class UserCreate(BaseModel):
    username: str
    password: str
    level: int = Field(ge=0, le=4)
    home_unit_id: str


class UserPatch(BaseModel):
    level: int | None = None
    home_unit_id: str | None = None
    active: bool | None = None
    password: str | None = None


class GrantCreate(BaseModel):
    grantee_id: str
    permissions: list[str] = []
    group_id: str | None = None
    scope_unit_id: str | None = None


class PermissionGroupCreate(BaseModel):
    name: str
    actions: list[str]


class AssetCreate(BaseModel):
    serial_number: str
    type: str
    owner_unit_id: str
    location_id: str | None = None
    properties: dict[str, str] = {}


class TransferDirectBody(BaseModel):
    location_id: str
    holder_user_id: str | None = None


class ReturnBody(BaseModel):
    condition: ReturnCondition


class AssetTypeCreate(BaseModel):
    name: str
    kind: AssetKind
    common_properties: list[str] = []


class LocationCreate(BaseModel):
    building: str
    floor: str
    room: str
    owner_unit_id: str
    capacity: int | None = None


class AssetGroupCreate(BaseModel):
    name: str
    asset_ids: list[str]


class RequestLineBody(BaseModel):
    asset_serial: str | None = None
    location_id: str | None = None
    note: str = ""


class RequestCreate(BaseModel):
    form: RequestForm
    kind: RequestKind
    text: str = ""
    lines: list[RequestLineBody] = []


class DecisionBody(BaseModel):
    note: str = ""


_STATUS_BY_ERROR = (
    (AuthenticationFailed, 401),
    (PermissionDenied, 403),
    (NotFound, 404),
    (QueryTimeout, 408),
    (Conflict, 409),
    (ValidationFailed, 422),
    (IoFailure, 500),
)


def _status_for(exc: UuisError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return status
    return 400


def _user_doc(user: User) -> dict:
    doc = record_to_doc(user)
    doc.pop("password_digest", None)
    return doc


def create_app(store: Store | None = None, config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig.from_env()
    store = store or Store(os.environ.get("UUIS_STORE_PATH") or None)
    app = FastAPI(title="UUIS", docs_url=None, redoc_url=None)
    sessions = SessionManager(store, config)
    app.state.store = store
    app.state.sessions = sessions
    app.state.config = config

    @app.exception_handler(UuisError)
    async def _uuis_error(request: Request, exc: UuisError):
        return JSONResponse(status_code=_status_for(exc),
                            content={"error": exc.code, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"error": "validation_failed", "detail": str(exc)})

    def current_user(request: Request) -> User:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise AuthenticationFailed("missing bearer token")
        session = sessions.authenticate(header[7:].strip())
        user = store.view().users.get(session.user_id)
        if user is None or not user.active:
            raise AuthenticationFailed("unknown or expired session")
        return user

    Actor = Depends(current_user)

    # -- sessions ---------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    def login(body: LoginBody, request: Request):
        client = request.client.host if request.client else ""
        session, user = sessions.login(body.username, body.password, client)
        return {
            "token": session.token,
            "expires_at": session.expires_at.isoformat(),
            "user": _user_doc(user),
        }

    @app.delete("/api/sessions", status_code=204)
    def logout(request: Request):
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            sessions.logout(header[7:].strip())
        return Response(status_code=204)

    # -- org units ---------------------------------------------------------

    @app.get("/api/org-units")
    def list_org_units(actor: User = Actor):
        db = store.view()
        if not authz.holds_anywhere(db, actor.id, PermissionAction.UNIVERSITY_PART_LIST):
            raise PermissionDenied("universityPart:list permission required")
        scopes = [p.scope_unit_id
                  for p in authz.effective_permissions(db, actor.id)
                  if p.action is PermissionAction.UNIVERSITY_PART_LIST
                  and p.scope_unit_id in db.org_units]
        sees_root = any(db.org_units.require(s).kind is UnitKind.UNIVERSITY for s in scopes)
        units = []
        for unit in db.org_units:
            if unit.kind is UnitKind.EXTERNAL:
                visible = sees_root  # detached units ride with root visibility
            else:
                visible = any(orgs.is_descendant(db, unit.id, s) for s in scopes)
            if visible:
                units.append(record_to_doc(unit))
        units.sort(key=lambda u: u["id"])
        return {"items": units}

    @app.post("/api/org-units", status_code=201)
    def create_org_unit(body: OrgUnitCreate, actor: User = Actor):
        unit = store.transact(lambda txn: orgs.create_org_unit(
            txn, actor.id, body.name, body.kind, body.parent_id))
        return record_to_doc(unit)

    @app.patch("/api/org-units/{unit_id}")
    def edit_org_unit(unit_id: str, body: OrgUnitPatch, actor: User = Actor):
        unit = store.transact(lambda txn: orgs.edit_org_unit(
            txn, actor.id, unit_id, {"name": body.name}))
        return record_to_doc(unit)

    @app.delete("/api/org-units/{unit_id}", status_code=204)
    def delete_org_unit(unit_id: str, actor: User = Actor):
        store.transact(lambda txn: orgs.delete_org_unit(txn, actor.id, unit_id))
        return Response(status_code=204)

    # -- users -------------------------------------------------------------

    @app.get("/api/users")
    def list_users(actor: User = Actor):
        db = store.view()
        if not authz.holds_anywhere(db, actor.id, PermissionAction.USER_LIST):
            raise PermissionDenied("user:list permission required")
        scopes = [p.scope_unit_id for p in authz.effective_permissions(db, actor.id)
                  if p.action is PermissionAction.USER_LIST and p.scope_unit_id in db.org_units]
        rows = [_user_doc(u) for u in db.users
                if any(orgs.is_descendant(db, u.home_unit_id, s) for s in scopes)]
        rows.sort(key=lambda u: u["id"])
        return {"items": rows}

    @app.post("/api/users", status_code=201)
    def create_user(body: UserCreate, actor: User = Actor):
        user = store.transact(lambda txn: orgs.create_user(
            txn, actor.id, body.username, body.password, body.level, body.home_unit_id))
        return _user_doc(user)

    @app.get("/api/users/{user_id}")
    def show_user(user_id: str, actor: User = Actor):
        db = store.view()
        target = db.users.require(user_id)
        if actor.id != user_id and not authz.check(
                db, actor.id, PermissionAction.USER_SHOW, target.home_unit_id):
            raise PermissionDenied("user:show permission required")
        return _user_doc(target)

    @app.patch("/api/users/{user_id}")
    def edit_user(user_id: str, body: UserPatch, actor: User = Actor):
        changes = {k: v for k, v in body.model_dump().items() if v is not None}
        user = store.transact(lambda txn: orgs.edit_user(txn, actor.id, user_id, changes))
        return _user_doc(user)

    @app.get("/api/users/{user_id}/permissions")
    def show_permissions(user_id: str, actor: User = Actor):
        db = store.view()
        target = db.users.require(user_id)
        if actor.id != user_id and not authz.check(
                db, actor.id, PermissionAction.USER_SHOW, target.home_unit_id):
            raise PermissionDenied("user:show permission required")
        permissions = []
        for p in sorted(authz.effective_permissions(db, user_id)):
            unit = db.org_units.get(p.scope_unit_id)
            permissions.append({
                "action": p.action.value,
                "scope_unit_id": p.scope_unit_id,
                "scope_unit_name": unit.name if unit else "",
            })
        return {"user_id": user_id, "level": target.level, "permissions": permissions}

    # -- grants and permission groups ----------------------------------------

    @app.post("/api/grants", status_code=201)
    def create_grant(body: GrantCreate, actor: User = Actor):
        if body.group_id is not None:
            if not body.scope_unit_id:
                raise ValidationFailed("granting a group needs scope_unit_id")
            grant = store.transact(lambda txn: authz.grant_group(
                txn, actor.id, body.grantee_id, body.group_id, body.scope_unit_id))
        else:
            permissions = {ScopedPermission.parse(p) for p in body.permissions}
            grant = store.transact(lambda txn: authz.delegate(
                txn, actor.id, body.grantee_id, permissions))
        return record_to_doc(grant)

    @app.delete("/api/grants/{grant_id}")
    def revoke_grant(grant_id: str, actor: User = Actor):
        grant = store.transact(lambda txn: authz.revoke(txn, actor.id, grant_id))
        return record_to_doc(grant)

    @app.get("/api/permission-groups")
    def list_permission_groups(actor: User = Actor):
        rows = [record_to_doc(g) for g in store.view().permission_groups]
        rows.sort(key=lambda g: g["id"])
        return {"items": rows}

    @app.post("/api/permission-groups", status_code=201)
    def create_permission_group(body: PermissionGroupCreate, actor: User = Actor):
        from .model import parse_action

        actions = {parse_action(a) for a in body.actions}
        group = store.transact(lambda txn: authz.create_permission_group(
            txn, actor.id, body.name, actions))
        return record_to_doc(group)

    # -- assets --------------------------------------------------------------

    def _visible_asset_docs(db, actor_id: str) -> list[dict]:
        scopes = [p.scope_unit_id for p in authz.effective_permissions(db, actor_id)
                  if p.action is PermissionAction.ASSET_LIST and p.scope_unit_id in db.org_units]
        docs = [record_to_doc(a) for a in db.assets
                if any(orgs.is_descendant(db, a.owner_unit_id, s) for s in scopes)]
        docs.sort(key=lambda a: a["id"])
        return docs

    @app.get("/api/assets")
    def list_assets(actor: User = Actor):
        db = store.view()
        if not authz.holds_anywhere(db, actor.id, PermissionAction.ASSET_LIST):
            raise PermissionDenied("asset:list permission required")
        return {"items": _visible_asset_docs(db, actor.id)}

    @app.post("/api/assets", status_code=201)
    def create_asset(body: AssetCreate, actor: User = Actor):
        asset = store.transact(lambda txn: inventory.add_asset(
            txn, actor.id, body.serial_number, body.type, body.owner_unit_id,
            body.location_id, body.properties))
        return record_to_doc(asset)

    @app.get("/api/assets/{asset_id}")
    def show_asset(asset_id: str, actor: User = Actor):
        db = store.view()
        asset = db.assets.require(asset_id)
        if not authz.check(db, actor.id, PermissionAction.ASSET_SHOW, asset.owner_unit_id):
            raise PermissionDenied("asset:show permission required")
        return record_to_doc(asset)

    @app.patch("/api/assets/{asset_id}")
    def patch_asset(asset_id: str, body: dict, actor: User = Actor):
        asset = store.transact(lambda txn: inventory.modify_asset(
            txn, actor.id, asset_id, body))
        return record_to_doc(asset)

    @app.post("/api/assets/{asset_id}/transfer-direct")
    def transfer_direct(asset_id: str, body: TransferDirectBody, actor: User = Actor):
        asset = store.transact(lambda txn: inventory.transfer_direct(
            txn, actor.id, asset_id, body.location_id, body.holder_user_id))
        return record_to_doc(asset)

    @app.post("/api/assets/{asset_id}/return")
    def return_asset(asset_id: str, body: ReturnBody, actor: User = Actor):
        asset = store.transact(lambda txn: inventory.return_asset(
            txn, actor.id, asset_id, body.condition))
        return record_to_doc(asset)

    @app.post("/api/assets/bulk")
    async def bulk_import(request: Request, actor: User = Actor):
        data = await request.body()
        return store.transact(lambda txn: inventory.bulk_import(txn, actor.id, data))

    # -- asset types, locations, groups ---------------------------------------

    @app.get("/api/asset-types")
    def list_asset_types(actor: User = Actor):
        rows = [record_to_doc(t) for t in store.view().asset_types]
        rows.sort(key=lambda t: t["id"])
        return {"items": rows}

    @app.post("/api/asset-types", status_code=201)
    def create_asset_type(body: AssetTypeCreate, actor: User = Actor):
        type_def = store.transact(lambda txn: inventory.define_asset_type(
            txn, actor.id, body.name, body.kind, body.common_properties))
        return record_to_doc(type_def)

    @app.get("/api/locations")
    def list_locations(actor: User = Actor):
        db = store.view()
        if not authz.holds_anywhere(db, actor.id, PermissionAction.LOCATION_LIST):
            raise PermissionDenied("location:list permission required")
        scopes = [p.scope_unit_id for p in authz.effective_permissions(db, actor.id)
                  if p.action is PermissionAction.LOCATION_LIST
                  and p.scope_unit_id in db.org_units]
        rows = [record_to_doc(l) for l in db.locations
                if any(orgs.is_descendant(db, l.owner_unit_id, s) for s in scopes)]
        rows.sort(key=lambda l: l["id"])
        return {"items": rows}

    @app.post("/api/locations", status_code=201)
    def create_location(body: LocationCreate, actor: User = Actor):
        location = store.transact(lambda txn: inventory.create_location(
            txn, actor.id, body.building, body.floor, body.room,
            body.owner_unit_id, body.capacity))
        return record_to_doc(location)

    @app.patch("/api/locations/{location_id}")
    def edit_location(location_id: str, body: dict, actor: User = Actor):
        location = store.transact(lambda txn: inventory.edit_location(
            txn, actor.id, location_id, body))
        return record_to_doc(location)

    @app.delete("/api/locations/{location_id}", status_code=204)
    def delete_location(location_id: str, actor: User = Actor):
        store.transact(lambda txn: inventory.delete_location(txn, actor.id, location_id))
        return Response(status_code=204)

    @app.get("/api/asset-groups")
    def list_asset_groups(actor: User = Actor):
        db = store.view()
        if not authz.holds_anywhere(db, actor.id, PermissionAction.ASSET_LIST):
            raise PermissionDenied("asset:list permission required")
        rows = [record_to_doc(g) for g in db.groups]
        rows.sort(key=lambda g: g["id"])
        return {"items": rows}

    @app.post("/api/asset-groups", status_code=201)
    def create_asset_group(body: AssetGroupCreate, actor: User = Actor):
        group = store.transact(lambda txn: inventory.group_assets(
            txn, actor.id, body.name, body.asset_ids))
        return record_to_doc(group)

    @app.delete("/api/asset-groups/{group_id}", status_code=204)
    def delete_asset_group(group_id: str, actor: User = Actor):
        store.transact(lambda txn: inventory.ungroup(txn, actor.id, group_id))
        return Response(status_code=204)

    # -- requests --------------------------------------------------------------

    def _request_visible(db, actor_id: str, request_obj) -> bool:
        if request_obj.requester_id == actor_id:
            return True
        requester = db.users.get(request_obj.requester_id)
        if requester and authz.check(db, actor_id, PermissionAction.REQUEST_SHOW,
                                     requester.home_unit_id):
            return True
        actor_user = db.users.require(actor_id)
        return any(workflow.slot_satisfied(db, actor_user, slot)
                   for slot in request_obj.route)

    @app.get("/api/requests")
    def list_requests(status: str | None = None, actor: User = Actor):
        db = store.view()
        scopes = [p.scope_unit_id for p in authz.effective_permissions(db, actor.id)
                  if p.action is PermissionAction.REQUEST_LIST
                  and p.scope_unit_id in db.org_units]
        rows = []
        for request_obj in db.requests:
            own = request_obj.requester_id == actor.id
            requester = db.users.get(request_obj.requester_id)
            visible = own or (requester is not None and any(
                orgs.is_descendant(db, requester.home_unit_id, s) for s in scopes))
            if not visible:
                continue
            if status and request_obj.status.value != status:
                continue
            rows.append(record_to_doc(request_obj))
        rows.sort(key=lambda r: r["id"])
        return {"items": rows}

    @app.get("/api/requests/pending")
    def pending_requests(actor: User = Actor):
        rows = [record_to_doc(r) for r in workflow.list_pending(store.view(), actor.id)]
        return {"items": rows}

    @app.post("/api/requests", status_code=201)
    def create_request(body: RequestCreate, actor: User = Actor):
        lines = [RequestLine(asset_serial=l.asset_serial or None,
                             location_id=l.location_id or None, note=l.note)
                 for l in body.lines]
        request_obj = store.transact(lambda txn: workflow.create_request(
            txn, actor.id, body.form, body.kind, body.text, lines))
        return record_to_doc(request_obj)

    @app.get("/api/requests/{request_id}")
    def show_request(request_id: str, actor: User = Actor):
        db = store.view()
        request_obj = db.requests.require(request_id)
        if not _request_visible(db, actor.id, request_obj):
            raise PermissionDenied("not allowed to view this request")
        return record_to_doc(request_obj)

    @app.post("/api/requests/{request_id}/approve")
    def approve_request(request_id: str, body: DecisionBody, actor: User = Actor):
        request_obj = store.transact(lambda txn: workflow.approve(
            txn, actor.id, request_id, body.note))
        return record_to_doc(request_obj)

    @app.post("/api/requests/{request_id}/reject")
    def reject_request(request_id: str, body: DecisionBody, actor: User = Actor):
        request_obj = store.transact(lambda txn: workflow.reject(
            txn, actor.id, request_id, body.note))
        return record_to_doc(request_obj)

    @app.post("/api/requests/{request_id}/cancel")
    def cancel_request(request_id: str, actor: User = Actor):
        request_obj = store.transact(lambda txn: workflow.cancel(txn, actor.id, request_id))
        return record_to_doc(request_obj)

    @app.post("/api/requests/{request_id}/execute")
    def execute_request(request_id: str, actor: User = Actor):
        request_obj = store.transact(lambda txn: workflow.mark_executed(
            txn, actor.id, request_id))
        return record_to_doc(request_obj)

    # -- search, reports, audit --------------------------------------------------

    def _parse_sort(sort: str | None) -> tuple[str, bool] | None:
        if not sort:
            return None
        field_name, _, direction = sort.partition(":")
        if direction not in ("", "asc", "desc"):
            raise ValidationFailed("sort direction must be asc or desc")
        return (field_name, direction != "desc")

    @app.get("/api/search")
    def search(request: Request, q: str | None = None, mode: str | None = None,
               sort: str | None = None, offset: int = 0,
               limit: int = reports.PAGE_LIMIT_DEFAULT, actor: User = Actor):
        filters = {k: v for k, v in request.query_params.items()
                   if k in reports.SEARCH_FILTER_FIELDS}
        if mode is None:
            mode = "simple" if q is not None else "advanced"
        try:
            parsed_mode = SearchMode(mode)
        except ValueError:
            raise ValidationFailed(f"mode must be simple or advanced, not {mode!r}") from None
        query = SearchQuery(mode=parsed_mode, text=q, filters=filters,
                            sort=_parse_sort(sort), offset=offset, limit=limit)
        return reports.search(store.view(), actor.id, query,
                              deadline_ms=config.query_timeout_ms)

    @app.get("/api/reports/{kind}")
    def run_report(kind: str, request: Request, sort: str | None = None,
                   actor: User = Actor):
        try:
            report_kind = ReportKind(kind)
        except ValueError:
            raise NotFound(f"no such report: {kind}") from None
        filters = {k: v for k, v in request.query_params.items()
                   if k in reports.REPORT_FILTER_FIELDS[report_kind]}
        spec = ReportSpec(kind=report_kind, filters=filters, sort=_parse_sort(sort))
        table = reports.report(store.view(), actor.id, spec,
                               deadline_ms=config.query_timeout_ms)
        accept = request.headers.get("accept", "")
        if "text/csv" in accept:
            csv_text = reports.render_csv(table["columns"], table["rows"])
            return PlainTextResponse(csv_text, media_type="text/csv")
        return table

    @app.get("/api/audit")
    def list_audit(actor_filter: str | None = None, entity_type: str | None = None,
                   since: str | None = None, until: str | None = None,
                   offset: int = 0, limit: int = 100, actor: User = Actor):
        def parse_stamp(value):
            if value is None:
                return None
            try:
                return datetime.fromisoformat(value)
            except ValueError:
                raise ValidationFailed(f"not an ISO timestamp: {value!r}") from None

        records = audit_ops.list_audit(
            store.view(), actor.id, actor=actor_filter, entity_type=entity_type,
            since=parse_stamp(since), until=parse_stamp(until),
            offset=offset, limit=limit)
        return {"items": [record_to_doc(r) for r in records]}

    @app.get("/api/audit/{seq}")
    def show_audit(seq: int, actor: User = Actor):
        return record_to_doc(audit_ops.show_audit(store.view(), actor.id, seq))

    if config.static_dir and config.static_dir.is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
