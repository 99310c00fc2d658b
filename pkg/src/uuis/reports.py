"""Search over the asset inventory and the three operator reports.

Every row returned is scope-checked: a caller only ever sees entities in
units where they hold the matching list permission. Results are
deterministic — default ordering is by entity id, explicit sorts break
ties the same way. Long scans honor a cooperative deadline, checked row
by row, standing in for the 1-minute query kill rule.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

from .errors import InactiveUser, PermissionDenied, QueryTimeout, ValidationFailed
from .model import (
    Asset,
    PermissionAction,
    ReportKind,
    SearchMode,
)
from .orgs import is_descendant
from .storage import View

DEFAULT_DEADLINE_MS = 60_000  # queries are killed after one minute by default
PAGE_LIMIT_DEFAULT = 100
PAGE_LIMIT_MAX = 1000

SEARCH_FILTER_FIELDS = ("serial", "type", "state", "owner_unit", "building", "holder", "status")
_SORTABLE_ASSET_FIELDS = ("serial_number", "type", "state", "owner_unit_id", "building", "holder_user_id")


@dataclass(frozen=True)
class SearchQuery:
    mode: SearchMode
    text: str | None = None
    filters: dict = field(default_factory=dict)
    sort: tuple[str, bool] | None = None  # (field, ascending)
    offset: int = 0
    limit: int = PAGE_LIMIT_DEFAULT


@dataclass(frozen=True)
class ReportSpec:
    kind: ReportKind
    filters: dict = field(default_factory=dict)
    sort: tuple[str, bool] | None = None


class Deadline:
    def __init__(self, budget_ms: float, clock=time.monotonic):
        self._clock = clock
        self._expires = clock() + budget_ms / 1000.0
        self._budget_ms = budget_ms

    def check(self) -> None:
        if self._clock() > self._expires:
            raise QueryTimeout(f"query exceeded its {self._budget_ms:.0f} ms deadline")


def _list_scopes(db: View, actor_id: str, action: PermissionAction) -> list[str]:
    from . import authz

    return [p.scope_unit_id for p in authz.effective_permissions(db, actor_id)
            if p.action is action and p.scope_unit_id in db.org_units]


def _unit_visible(db: View, unit_id: str, scopes: list[str]) -> bool:
    return any(is_descendant(db, unit_id, scope) for scope in scopes)


def _require_mode_permission(db: View, actor_id: str, mode: SearchMode) -> None:
    from . import authz

    action = (PermissionAction.SEARCH_SIMPLE if mode is SearchMode.SIMPLE
              else PermissionAction.SEARCH_ADVANCED)
    if not authz.holds_anywhere(db, actor_id, action):
        raise PermissionDenied(f"{action.value} permission required")


def _validate_query(query: SearchQuery) -> None:
    if query.mode is SearchMode.SIMPLE and not (query.text or "").strip():
        raise ValidationFailed("simple search needs a text term")
    if query.mode is SearchMode.ADVANCED and not query.filters:
        raise ValidationFailed("advanced search needs at least one filter")
    unknown = set(query.filters) - set(SEARCH_FILTER_FIELDS)
    if unknown:
        raise ValidationFailed(f"unknown search filters: {sorted(unknown)}")
    if query.sort and query.sort[0] not in _SORTABLE_ASSET_FIELDS:
        raise ValidationFailed(f"cannot sort on {query.sort[0]!r}")
    if query.offset < 0:
        raise ValidationFailed("offset cannot be negative")
    if not 1 <= query.limit <= PAGE_LIMIT_MAX:
        raise ValidationFailed(f"limit must be 1..{PAGE_LIMIT_MAX}")


def _asset_row(db: View, asset: Asset) -> dict:
    type_def = db.asset_types.get(asset.type_id)
    location = db.locations.get(asset.location_id) if asset.location_id else None
    return {
        "id": asset.id,
        "serial_number": asset.serial_number,
        "type": type_def.name if type_def else "",
        "state": asset.state.value,
        "owner_unit_id": asset.owner_unit_id,
        "building": location.building if location else "",
        "floor": location.floor if location else "",
        "room": location.room if location else "",
        "holder_user_id": asset.holder_user_id or "",
        "group_id": asset.group_id or "",
        "properties": dict(asset.properties),
    }


def _matches_simple(row: dict, needle: str) -> bool:
    needle = needle.lower()
    if needle in row["serial_number"].lower() or needle in row["type"].lower():
        return True
    return any(needle in value.lower() for value in row["properties"].values())


def _matches_filters(db: View, row: dict, filters: dict) -> bool:
    for key, wanted in filters.items():
        wanted = str(wanted)
        if key == "serial" and row["serial_number"] != wanted:
            return False
        if key == "type" and row["type"] != wanted:
            return False
        if key in ("state", "status") and row["state"] != wanted:
            return False
        if key == "building" and row["building"] != wanted:
            return False
        if key == "owner_unit":
            unit = db.org_units.get(row["owner_unit_id"])
            if row["owner_unit_id"] != wanted and (unit is None or unit.name != wanted):
                return False
        if key == "holder":
            holder = db.users.get(row["holder_user_id"]) if row["holder_user_id"] else None
            if row["holder_user_id"] != wanted and (holder is None or holder.username != wanted):
                return False
    return True


def search(db: View, actor_id: str, query: SearchQuery,
           deadline_ms: float = DEFAULT_DEADLINE_MS) -> dict:
    """Scan the inventory the actor may see; empty result is a success."""
    _validate_query(query)
    _require_mode_permission(db, actor_id, query.mode)
    scopes = _list_scopes(db, actor_id, PermissionAction.ASSET_LIST)
    deadline = Deadline(deadline_ms)
    rows = []
    for asset in db.assets:
        deadline.check()
        if not _unit_visible(db, asset.owner_unit_id, scopes):
            continue
        row = _asset_row(db, asset)
        if query.mode is SearchMode.SIMPLE:
            if not _matches_simple(row, query.text.strip()):
                continue
        elif not _matches_filters(db, row, query.filters):
            continue
        rows.append(row)
    rows = _sorted_rows(rows, query.sort, tiebreak="id")
    page = rows[query.offset:query.offset + query.limit]
    return {"total": len(rows), "offset": query.offset, "limit": query.limit,
            "items": page}


def _sorted_rows(rows: list[dict], sort: tuple[str, bool] | None, tiebreak: str) -> list[dict]:
    rows = sorted(rows, key=lambda r: r[tiebreak])
    if sort:
        field_name, ascending = sort
        rows.sort(key=lambda r: str(r.get(field_name, "")), reverse=not ascending)
    return rows


# --- reports -----------------------------------------------------------------

REPORT_COLUMNS = {
    ReportKind.ASSETS_BY_LOCATION: (
        "building", "floor", "room", "serial_number", "type", "state", "owner_unit"),
    ReportKind.REQUESTS: (
        "id", "requester", "form", "kind", "status", "progress", "created_at", "resolved_at"),
    ReportKind.USER_PERMISSIONS: ("username", "level", "action", "scope_unit"),
}

REPORT_FILTER_FIELDS = {
    ReportKind.ASSETS_BY_LOCATION: {"building", "floor", "room", "serial_number",
                                    "type", "state", "owner_unit"},
    ReportKind.REQUESTS: {"status", "kind", "form", "requester"},
    ReportKind.USER_PERMISSIONS: {"username", "action", "level"},
}


def report(db: View, actor_id: str, spec: ReportSpec,
           deadline_ms: float = DEFAULT_DEADLINE_MS) -> dict:
    """Build one of the three reports, filtered and sorted, scope-checked."""
    from . import authz

    if not authz.holds_anywhere(db, actor_id, PermissionAction.REPORT_SHOW):
        raise PermissionDenied("report:show permission required")
    unknown = set(spec.filters) - REPORT_FILTER_FIELDS[spec.kind]
    if unknown:
        raise ValidationFailed(f"unknown report filters: {sorted(unknown)}")
    columns = REPORT_COLUMNS[spec.kind]
    if spec.sort and spec.sort[0] not in columns:
        raise ValidationFailed(f"cannot sort on {spec.sort[0]!r}")
    deadline = Deadline(deadline_ms)
    if spec.kind is ReportKind.ASSETS_BY_LOCATION:
        rows = _assets_by_location_rows(db, actor_id, deadline)
        default_key = ("building", "floor", "room", "serial_number")
    elif spec.kind is ReportKind.REQUESTS:
        rows = _request_rows(db, actor_id, deadline)
        default_key = ("created_at", "id")
    else:
        rows = _user_permission_rows(db, actor_id, deadline)
        default_key = ("username", "action", "scope_unit")
    rows = [row for row in rows
            if all(str(row.get(k, "")) == str(v) for k, v in spec.filters.items())]
    rows.sort(key=lambda r: tuple(str(r[k]) for k in default_key))
    if spec.sort:
        field_name, ascending = spec.sort
        rows.sort(key=lambda r: str(r.get(field_name, "")), reverse=not ascending)
    return {"kind": spec.kind.value, "columns": list(columns), "rows": rows}


def _assets_by_location_rows(db: View, actor_id: str, deadline: Deadline) -> list[dict]:
    scopes = _list_scopes(db, actor_id, PermissionAction.ASSET_LIST)
    rows = []
    for asset in db.assets:
        deadline.check()
        if not _unit_visible(db, asset.owner_unit_id, scopes):
            continue
        base = _asset_row(db, asset)
        owner = db.org_units.get(asset.owner_unit_id)
        rows.append({
            "building": base["building"], "floor": base["floor"], "room": base["room"],
            "serial_number": base["serial_number"], "type": base["type"],
            "state": base["state"], "owner_unit": owner.name if owner else "",
        })
    return rows


def _request_rows(db: View, actor_id: str, deadline: Deadline) -> list[dict]:
    scopes = _list_scopes(db, actor_id, PermissionAction.REQUEST_LIST)
    rows = []
    for request in db.requests:
        deadline.check()
        requester = db.users.get(request.requester_id)
        own = request.requester_id == actor_id
        if not own and (requester is None
                        or not _unit_visible(db, requester.home_unit_id, scopes)):
            continue
        rows.append({
            "id": request.id,
            "requester": requester.username if requester else "",
            "form": request.form.value,
            "kind": request.kind.value,
            "status": request.status.value,
            "progress": f"{len(request.approvals)}/{len(request.route)}",
            "created_at": request.created_at.isoformat(),
            "resolved_at": request.resolved_at.isoformat() if request.resolved_at else "",
        })
    return rows


def _user_permission_rows(db: View, actor_id: str, deadline: Deadline) -> list[dict]:
    from . import authz

    scopes = _list_scopes(db, actor_id, PermissionAction.USER_LIST)
    rows = []
    for user in db.users:
        deadline.check()
        if user.id != actor_id and not _unit_visible(db, user.home_unit_id, scopes):
            continue
        try:
            permissions = authz.effective_permissions(db, user.id)
        except InactiveUser:
            continue
        for permission in permissions:
            rows.append({
                "username": user.username,
                "level": user.level,
                "action": permission.action.value,
                "scope_unit": permission.scope_unit_id,
            })
    return rows


def render_csv(columns: list[str], rows: list[dict]) -> str:
    """RFC-4180 rendering, same quoting rules as the bulk entry file."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row.get(column, "") for column in columns])
    return buffer.getvalue()
