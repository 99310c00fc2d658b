"""Domain types: org tree, users, permissions, assets, requests, audit.

All records are immutable dataclasses; every mutation produces a new
record via :func:`dataclasses.replace` inside a storage transaction.
``record_to_doc``/``record_from_doc`` give the canonical JSON form used
by snapshots, audit before/after payloads, and the HTTP layer.
"""

from __future__ import annotations

import dataclasses
import enum
import typing
from dataclasses import dataclass, field
from datetime import datetime

from .errors import ValidationFailed


class UnitKind(str, enum.Enum):
    UNIVERSITY = "university"
    FACULTY = "faculty"
    DEPARTMENT = "department"
    EXTERNAL = "external"


class AssetKind(str, enum.Enum):
    SPACE = "space"
    SOFTWARE_LICENCE = "software_licence"
    OTHER = "other"


class AssetState(str, enum.Enum):
    AVAILABLE = "available"
    BORROWED = "borrowed"
    RESERVED = "reserved"
    AWAITING_TRANSFER = "awaiting_transfer"
    DAMAGED = "damaged"
    OUT_OF_INVENTORY = "out_of_inventory"


class RequestForm(str, enum.Enum):
    BASIC = "basic"
    ADVANCED = "advanced"
    EXCEPTION = "exception"


class RequestKind(str, enum.Enum):
    BORROW = "borrow"
    RESERVE = "reserve"
    TRANSFER = "transfer"
    EXCEPTION = "exception"


class RequestStatus(str, enum.Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"
    AWAITING_EXECUTION = "awaiting_execution"
    EXECUTED = "executed"
    CANCELLED = "cancelled"


#: Legal request status transitions. Approved -> AwaitingExecution happens
#: automatically in the same transaction as the final approval.
REQUEST_TRANSITIONS: frozenset[tuple[RequestStatus, RequestStatus]] = frozenset(
    {
        (RequestStatus.PENDING, RequestStatus.APPROVED),
        (RequestStatus.PENDING, RequestStatus.REJECTED),
        (RequestStatus.PENDING, RequestStatus.CANCELLED),
        (RequestStatus.APPROVED, RequestStatus.AWAITING_EXECUTION),
        (RequestStatus.AWAITING_EXECUTION, RequestStatus.EXECUTED),
    }
)


class Decision(str, enum.Enum):
    APPROVE = "approve"
    REJECT = "reject"


class ReturnCondition(str, enum.Enum):
    OK = "ok"
    DAMAGED = "damaged"


class SearchMode(str, enum.Enum):
    SIMPLE = "simple"
    ADVANCED = "advanced"


class ReportKind(str, enum.Enum):
    ASSETS_BY_LOCATION = "assets-by-location"
    REQUESTS = "requests"
    USER_PERMISSIONS = "user-permissions"


class PermissionAction(str, enum.Enum):
    """Closed permission vocabulary; values are the wire strings."""

    REQUEST_CREATE = "request:create"
    REQUEST_LIST = "request:list"
    REQUEST_SHOW = "request:show"
    REQUEST_EDIT = "request:edit"
    REQUEST_APPROVE = "request:approve"
    ASSET_CREATE = "asset:create"
    ASSET_LIST = "asset:list"
    ASSET_SHOW = "asset:show"
    ASSET_EDIT = "asset:edit"
    LOCATION_CREATE = "location:create"
    LOCATION_LIST = "location:list"
    LOCATION_SHOW = "location:show"
    LOCATION_EDIT = "location:edit"
    LOCATION_DELETE = "location:delete"
    UNIVERSITY_PART_CREATE = "universityPart:create"
    UNIVERSITY_PART_LIST = "universityPart:list"
    UNIVERSITY_PART_SHOW = "universityPart:show"
    UNIVERSITY_PART_EDIT = "universityPart:edit"
    UNIVERSITY_PART_DELETE = "universityPart:delete"
    SEARCH_SIMPLE = "search:simple"
    SEARCH_ADVANCED = "search:advanced"
    REPORT_LIST = "report:list"
    REPORT_SHOW = "report:show"
    USER_LIST = "user:list"
    USER_SHOW = "user:show"
    USER_EDIT = "user:edit"
    AUDIT_LIST = "audit:list"
    AUDIT_SHOW = "audit:show"


def parse_action(text: str) -> PermissionAction:
    """Parse a permission action string; anything outside the vocabulary fails."""
    try:
        return PermissionAction(text)
    except ValueError:
        raise ValidationFailed(f"unknown permission action: {text!r}") from None


@dataclass(frozen=True, order=True)
class ScopedPermission:
    """An action authorized on every entity owned by ``scope_unit_id`` or
    any descendant unit. Serializes as ``action@unit-id``."""

    action: PermissionAction
    scope_unit_id: str

    def __str__(self) -> str:
        return f"{self.action.value}@{self.scope_unit_id}"

    @classmethod
    def parse(cls, text: str) -> "ScopedPermission":
        action, sep, unit = text.partition("@")
        if not sep or not unit:
            raise ValidationFailed(f"expected action@unit, got {text!r}")
        return cls(parse_action(action), unit)


@dataclass(frozen=True)
class OrgUnit:
    id: str
    name: str
    kind: UnitKind
    parent_id: str | None = None


@dataclass(frozen=True)
class User:
    id: str
    username: str
    password_digest: str
    level: int
    home_unit_id: str
    active: bool = True


#: Which home-unit kinds each administrative level may have.
LEVEL_HOME_KINDS: dict[int, frozenset[UnitKind]] = {
    0: frozenset({UnitKind.UNIVERSITY, UnitKind.FACULTY, UnitKind.DEPARTMENT}),
    1: frozenset({UnitKind.DEPARTMENT}),
    2: frozenset({UnitKind.FACULTY}),
    3: frozenset({UnitKind.UNIVERSITY}),
    4: frozenset(UnitKind),
}


@dataclass(frozen=True)
class PermissionGroup:
    id: str
    name: str
    actions: frozenset[PermissionAction]


@dataclass(frozen=True)
class Grant:
    id: str
    grantor_id: str
    grantee_id: str
    permissions: frozenset[ScopedPermission]
    created_at: datetime
    revoked_at: datetime | None = None

    @property
    def live(self) -> bool:
        return self.revoked_at is None


@dataclass(frozen=True)
class AssetTypeDef:
    id: str
    name: str
    kind: AssetKind
    common_properties: tuple[str, ...] = ()


@dataclass(frozen=True)
class Asset:
    id: str
    serial_number: str
    type_id: str
    owner_unit_id: str
    state: AssetState = AssetState.AVAILABLE
    location_id: str | None = None
    holder_user_id: str | None = None
    group_id: str | None = None
    properties: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class AssetGroup:
    id: str
    name: str
    member_asset_ids: frozenset[str]


@dataclass(frozen=True)
class Location:
    id: str
    building: str
    floor: str
    room: str
    owner_unit_id: str
    capacity: int | None = None

    @property
    def room_key(self) -> tuple[str, str, str]:
        return (self.building, self.floor, self.room)


@dataclass(frozen=True)
class RequestLine:
    asset_serial: str | None = None
    location_id: str | None = None
    note: str = ""


@dataclass(frozen=True)
class RouteSlot:
    required_level: int
    scope_unit_id: str


@dataclass(frozen=True)
class ApprovalRecord:
    approver_id: str
    slot_index: int
    decision: Decision
    at: datetime
    note: str = ""


@dataclass(frozen=True)
class Request:
    id: str
    requester_id: str
    form: RequestForm
    kind: RequestKind
    text: str
    lines: tuple[RequestLine, ...]
    route: tuple[RouteSlot, ...]
    approvals: tuple[ApprovalRecord, ...]
    status: RequestStatus
    created_at: datetime
    resolved_at: datetime | None = None

    def unfilled_slots(self) -> list[tuple[int, RouteSlot]]:
        filled = {a.slot_index for a in self.approvals}
        return [(i, s) for i, s in enumerate(self.route) if i not in filled]


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    at: datetime
    actor_id: str
    action: str
    entity_type: str
    entity_id: str
    before: dict | None = None
    after: dict | None = None


@dataclass(frozen=True)
class Notification:
    id: str
    recipient_id: str
    subject: str
    body: str
    created_at: datetime
    delivered: bool = False


@dataclass(frozen=True)
class Session:
    token: str
    user_id: str
    created_at: datetime
    expires_at: datetime
    client_address: str


# --- canonical (de)serialization -------------------------------------------

def _encode(value):
    if isinstance(value, enum.Enum):
        return value.value
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, datetime):
        return value.isoformat()
    if isinstance(value, ScopedPermission):
        return str(value)
    if dataclasses.is_dataclass(value):
        return {f.name: _encode(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (frozenset, set)):
        return sorted(_encode(v) for v in value)
    if isinstance(value, (tuple, list)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    raise TypeError(f"cannot encode {type(value).__name__}")


def record_to_doc(record) -> dict:
    """Canonical JSON-ready form of a domain record."""
    return _encode(record)


def _decode(hint, value):
    origin = typing.get_origin(hint)
    if origin is typing.Union or str(origin) == "types.UnionType":
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if value is None:
            return None
        return _decode(args[0], value)
    if hint is datetime:
        return datetime.fromisoformat(value)
    if hint is ScopedPermission:
        return ScopedPermission.parse(value)
    if isinstance(hint, type) and issubclass(hint, enum.Enum):
        return hint(value)
    if origin in (frozenset, set):
        (item,) = typing.get_args(hint)
        return frozenset(_decode(item, v) for v in value)
    if origin is tuple:
        item = typing.get_args(hint)[0]
        return tuple(_decode(item, v) for v in value)
    if origin is list:
        (item,) = typing.get_args(hint)
        return [_decode(item, v) for v in value]
    if origin is dict:
        _, item = typing.get_args(hint)
        return {k: _decode(item, v) for k, v in value.items()}
    if dataclasses.is_dataclass(hint):
        return record_from_doc(hint, value)
    return value


def record_from_doc(cls, doc: dict):
    """Inverse of :func:`record_to_doc` for the given record class."""
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in doc:
            kwargs[f.name] = _decode(hints[f.name], doc[f.name])
    return cls(**kwargs)
