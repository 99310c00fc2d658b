"""Persistence: transactions, constraint enforcement, snapshot backup.

The store is embedded and in-process. All committed state is immutable;
a transaction works on copy-on-write table drafts and swaps them in
atomically under a single writer lock, so readers always see a
consistent snapshot and a failed transaction leaves nothing behind.
A file-backed store flushes the canonical snapshot after every commit
(write-temp + rename); the in-memory mode is for tests and tooling.

Canonical snapshot form: one UTF-8 JSON document, sections in a fixed
order, records sorted by id (audit by seq), all object keys sorted.
Restoring a snapshot and re-exporting yields byte-identical output.
"""

from __future__ import annotations

import json
import re
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterator, TypeVar

from .errors import (
    ConstraintViolation,
    IoFailure,
    NonEmptyStore,
    NotFound,
    VersionMismatch,
)
from .model import (
    LEVEL_HOME_KINDS,
    Asset,
    AssetGroup,
    AssetState,
    AssetTypeDef,
    AuditRecord,
    Grant,
    Location,
    Notification,
    OrgUnit,
    PermissionGroup,
    Request,
    RequestStatus,
    UnitKind,
    User,
    record_from_doc,
    record_to_doc,
)

FORMAT_VERSION = 1

#: Snapshot section order; also the table names of the store.
SECTIONS: tuple[str, ...] = (
    "org_units",
    "users",
    "permission_groups",
    "grants",
    "asset_types",
    "locations",
    "assets",
    "groups",
    "requests",
    "audit",
    "notifications",
)

SECTION_TYPES = {
    "org_units": OrgUnit,
    "users": User,
    "permission_groups": PermissionGroup,
    "grants": Grant,
    "asset_types": AssetTypeDef,
    "locations": Location,
    "assets": Asset,
    "groups": AssetGroup,
    "requests": Request,
    "audit": AuditRecord,
    "notifications": Notification,
}

ID_PREFIXES = {
    "org_units": "ou",
    "users": "usr",
    "permission_groups": "pg",
    "grants": "grt",
    "asset_types": "at",
    "locations": "loc",
    "assets": "ast",
    "groups": "ag",
    "requests": "req",
    "notifications": "ntf",
    "bulk_import": "imp",  # no table; ids tag import-summary audit records
}

_ID_RE = re.compile(r"^[a-z]+-(\d{6,})$")

T = TypeVar("T")


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Table:
    """Read access to one table of a snapshot."""

    def __init__(self, name: str, records: dict):
        self.name = name
        self._records = records

    def get(self, key) -> object | None:
        return self._records.get(key)

    def require(self, key) -> object:
        record = self._records.get(key)
        if record is None:
            raise NotFound(f"{self.name}: no such entry {key!r}")
        return record

    def values(self) -> list:
        return list(self._records.values())

    def ids(self) -> list:
        return list(self._records.keys())

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key) -> bool:
        return key in self._records

    def __iter__(self) -> Iterator:
        return iter(self._records.values())


class _TxnTable(Table):
    def __init__(self, name: str, records: dict, mark_dirty: Callable[[], None]):
        super().__init__(name, records)
        self._mark_dirty = mark_dirty

    def put(self, record) -> None:
        key = record.seq if isinstance(record, AuditRecord) else record.id
        self._records[key] = record
        self._mark_dirty()

    def delete(self, key) -> None:
        if self._records.pop(key, None) is not None:
            self._mark_dirty()


class View:
    """Immutable snapshot of committed state. Safe to share across threads."""

    def __init__(self, tables: dict[str, dict], last_mutated_at: datetime | None):
        self._tables = tables
        self.last_mutated_at = last_mutated_at
        for name in SECTIONS:
            setattr(self, name, self._make_table(name))

    def _make_table(self, name: str) -> Table:
        return Table(name, self._tables[name])

    def table(self, name: str) -> Table:
        return getattr(self, name)


class Txn(View):
    """Copy-on-write transaction draft. Created by :meth:`Store.transact`."""

    def __init__(self, store: "Store", tables: dict[str, dict],
                 last_mutated_at: datetime | None, id_counter: int):
        super().__init__(tables, last_mutated_at)
        self._store = store
        self._id_counter = id_counter
        self._mutated = False

    def _make_table(self, name: str) -> Table:
        return _TxnTable(name, self._tables[name], self._mark_dirty)

    def _mark_dirty(self) -> None:
        self._mutated = True

    def now(self) -> datetime:
        return self._store.clock()

    def new_id(self, table: str) -> str:
        self._id_counter += 1
        return f"{ID_PREFIXES[table]}-{self._id_counter:06d}"

    def put(self, table: str, record) -> None:
        self.table(table).put(record)

    def delete(self, table: str, key) -> None:
        self.table(table).delete(key)

    def record(self, actor_id: str, action: str, entity_type: str, entity_id: str,
               before: dict | None = None, after: dict | None = None) -> AuditRecord:
        """Append an audit record; commits atomically with its mutation."""
        record = AuditRecord(
            seq=len(self.table("audit")) + 1,
            at=self.now(),
            actor_id=actor_id,
            action=action,
            entity_type=entity_type,
            entity_id=str(entity_id),
            before=before,
            after=after,
        )
        self.put("audit", record)
        return record

    def notify(self, recipient_id: str, subject: str, body: str) -> Notification:
        notification = Notification(
            id=self.new_id("notifications"),
            recipient_id=recipient_id,
            subject=subject,
            body=body,
            created_at=self.now(),
        )
        self.put("notifications", notification)
        return notification


class Store:
    """Embedded store; ``path=None`` keeps everything in memory."""

    def __init__(self, path: str | Path | None = None,
                 clock: Callable[[], datetime] = utc_now):
        self.clock = clock
        self._path = Path(path) if path else None
        self._lock = threading.RLock()
        self._tables: dict[str, dict] = {name: {} for name in SECTIONS}
        self._last_mutated_at: datetime | None = None
        self._id_counter = 0
        if self._path and self._path.exists():
            self._load_state(self._path.read_bytes())

    # -- reads ---------------------------------------------------------

    def view(self) -> View:
        with self._lock:
            return View(dict(self._tables), self._last_mutated_at)

    def is_empty(self) -> bool:
        with self._lock:
            return all(not records for records in self._tables.values())

    # -- writes --------------------------------------------------------

    def transact(self, work: Callable[[Txn], T]) -> T:
        """Run ``work`` against a draft; commit all of its writes or none.

        Writers serialize on the store lock; a commit validates every
        store-level constraint and raises ConstraintViolation (discarding
        the draft) on any breach.
        """
        with self._lock:
            draft = {name: dict(records) for name, records in self._tables.items()}
            txn = Txn(self, draft, self._last_mutated_at, self._id_counter)
            result = work(txn)
            if txn._mutated:
                verify_integrity(txn)
                self._tables = draft
                self._id_counter = txn._id_counter
                self._last_mutated_at = self.clock()
                if self._path:
                    self._flush()
            return result

    # -- snapshots -------------------------------------------------------

    def export_bytes(self) -> bytes:
        with self._lock:
            return export_snapshot(self.view())

    def backup(self, path: str | Path) -> dict:
        """Write the canonical snapshot to ``path``; returns a summary."""
        data = self.export_bytes()
        try:
            Path(path).write_bytes(data)
        except OSError as exc:
            raise IoFailure(f"cannot write backup: {exc}") from exc
        view = self.view()
        return {
            "path": str(path),
            "bytes": len(data),
            "records": {name: len(view.table(name)) for name in SECTIONS},
        }

    def restore(self, path: str | Path, force: bool = False) -> None:
        """Replace store contents with the snapshot at ``path``.

        Refuses to clobber a non-empty store unless ``force`` is set.
        """
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read snapshot: {exc}") from exc
        with self._lock:
            if not self.is_empty() and not force:
                raise NonEmptyStore("store is not empty; pass force to overwrite")
            self._load_state(data)
            if self._path:
                self._flush()

    def _load_state(self, data: bytes) -> None:
        tables, taken_at = parse_snapshot(data)
        view = View(tables, taken_at)
        verify_integrity(view)
        self._tables = tables
        self._last_mutated_at = taken_at
        self._id_counter = _max_id_counter(tables)

    def _flush(self) -> None:
        data = export_snapshot(View(dict(self._tables), self._last_mutated_at))
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        try:
            tmp.write_bytes(data)
            tmp.replace(self._path)
        except OSError as exc:
            raise IoFailure(f"cannot persist store: {exc}") from exc


# --- canonical snapshot ------------------------------------------------


def export_snapshot(view: View) -> bytes:
    sections = []
    for name in SECTIONS:
        records = view.table(name).values()
        if name == "audit":
            records.sort(key=lambda r: r.seq)
        else:
            records.sort(key=lambda r: r.id)
        sections.append({"name": name, "records": [record_to_doc(r) for r in records]})
    doc = {
        "format_version": FORMAT_VERSION,
        "taken_at": view.last_mutated_at.isoformat() if view.last_mutated_at else None,
        "sections": sections,
    }
    text = json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2)
    return (text + "\n").encode("utf-8")


def parse_snapshot(data: bytes) -> tuple[dict[str, dict], datetime | None]:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise VersionMismatch(f"not a snapshot document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"snapshot format_version {doc.get('format_version')!r} "
            f"not supported (expected {FORMAT_VERSION})"
        )
    by_name = {s["name"]: s["records"] for s in doc.get("sections", [])}
    unknown = set(by_name) - set(SECTIONS)
    if unknown:
        raise VersionMismatch(f"unknown snapshot sections: {sorted(unknown)}")
    tables: dict[str, dict] = {}
    for name in SECTIONS:
        cls = SECTION_TYPES[name]
        records = [record_from_doc(cls, d) for d in by_name.get(name, [])]
        if name == "audit":
            tables[name] = {r.seq: r for r in records}
        else:
            tables[name] = {r.id: r for r in records}
    taken_at = doc.get("taken_at")
    return tables, datetime.fromisoformat(taken_at) if taken_at else None


def _max_id_counter(tables: dict[str, dict]) -> int:
    highest = 0
    for name in SECTIONS:
        if name == "audit":
            continue
        for key in tables[name]:
            match = _ID_RE.match(key)
            if match:
                highest = max(highest, int(match.group(1)))
    return highest


# --- integrity ----------------------------------------------------------


def verify_integrity(view: View) -> None:
    """Constraint scan over a full snapshot; raises ConstraintViolation.

    Runs at every commit and on snapshot import, so no reachable committed
    state can violate a store-level invariant.
    """
    _check_org_tree(view)
    _check_users(view)
    _check_uniques(view)
    _check_assets(view)
    _check_groups(view)
    _check_requests(view)
    _check_audit(view)


def _fail(message: str) -> None:
    raise ConstraintViolation(message)


def _check_org_tree(view: View) -> None:
    units = view.table("org_units")
    roots = [u for u in units if u.kind is UnitKind.UNIVERSITY]
    if units.values() and len(roots) != 1:
        _fail(f"expected exactly one university unit, found {len(roots)}")
    for unit in units:
        if unit.kind is UnitKind.UNIVERSITY:
            if unit.parent_id is not None:
                _fail("university unit must not have a parent")
        elif unit.kind is UnitKind.EXTERNAL:
            if unit.parent_id is not None:
                _fail(f"external unit {unit.id} must not have a parent")
        else:
            parent = units.get(unit.parent_id) if unit.parent_id else None
            if parent is None:
                _fail(f"unit {unit.id} has no valid parent")
            wanted = UnitKind.UNIVERSITY if unit.kind is UnitKind.FACULTY else UnitKind.FACULTY
            if parent.kind is not wanted:
                _fail(f"{unit.kind.value} {unit.id} must hang under a {wanted.value}")
        # Parent chain terminates at the university within 3 hops.
        current, hops = unit, 0
        while current.parent_id is not None:
            hops += 1
            if hops > 3:
                _fail(f"unit {unit.id} parent chain exceeds 3 hops")
            current = units.get(current.parent_id)
            if current is None:
                _fail(f"unit {unit.id} has a dangling parent link")
        if unit.kind not in (UnitKind.EXTERNAL,) and current.kind is not UnitKind.UNIVERSITY:
            _fail(f"unit {unit.id} does not reach the university root")


def _check_users(view: View) -> None:
    units = view.table("org_units")
    seen: dict[str, str] = {}
    for user in view.table("users"):
        lowered = user.username.lower()
        if lowered in seen:
            _fail(f"duplicate username {user.username!r}")
        seen[lowered] = user.id
        home = units.get(user.home_unit_id)
        if home is None:
            _fail(f"user {user.id} has a dangling home unit")
        if user.level not in LEVEL_HOME_KINDS:
            _fail(f"user {user.id} has invalid level {user.level}")
        if home.kind not in LEVEL_HOME_KINDS[user.level]:
            _fail(f"level-{user.level} user {user.id} cannot be homed at a {home.kind.value}")


def _check_uniques(view: View) -> None:
    names = set()
    for type_def in view.table("asset_types"):
        if type_def.name in names:
            _fail(f"duplicate asset type name {type_def.name!r}")
        names.add(type_def.name)
        if len(set(type_def.common_properties)) != len(type_def.common_properties):
            _fail(f"asset type {type_def.name!r} repeats a common property")
    rooms = set()
    for location in view.table("locations"):
        if location.room_key in rooms:
            _fail(f"duplicate location {location.room_key}")
        rooms.add(location.room_key)
        if location.owner_unit_id not in view.table("org_units"):
            _fail(f"location {location.id} has a dangling owner unit")
    group_names = set()
    for group in view.table("groups"):
        if group.name in group_names:
            _fail(f"duplicate asset group name {group.name!r}")
        group_names.add(group.name)
    pg_names = set()
    for pg in view.table("permission_groups"):
        if pg.name in pg_names:
            _fail(f"duplicate permission group name {pg.name!r}")
        pg_names.add(pg.name)
        if not pg.actions:
            _fail(f"permission group {pg.name!r} has no actions")
    for grant in view.table("grants"):
        if not grant.permissions:
            _fail(f"grant {grant.id} carries no permissions")
        for user_id in (grant.grantor_id, grant.grantee_id):
            if user_id not in view.table("users"):
                _fail(f"grant {grant.id} references missing user {user_id}")


def _check_assets(view: View) -> None:
    units = view.table("org_units")
    serials = set()
    for asset in view.table("assets"):
        owner = units.get(asset.owner_unit_id)
        if owner is None:
            _fail(f"asset {asset.id} has a dangling owner unit")
        if owner.kind is UnitKind.EXTERNAL:
            _fail(f"asset {asset.id} cannot be owned by an external unit")
        if asset.state is not AssetState.OUT_OF_INVENTORY:
            if asset.serial_number in serials:
                _fail(f"duplicate serial {asset.serial_number!r}")
            serials.add(asset.serial_number)
        if (asset.state is AssetState.BORROWED) != (asset.holder_user_id is not None):
            _fail(f"asset {asset.id}: borrowed state and holder must agree")
        if asset.holder_user_id and asset.holder_user_id not in view.table("users"):
            _fail(f"asset {asset.id} held by missing user")
        if asset.location_id and asset.location_id not in view.table("locations"):
            _fail(f"asset {asset.id} placed at missing location")
        if asset.type_id not in view.table("asset_types"):
            _fail(f"asset {asset.id} has missing type")


def _check_groups(view: View) -> None:
    assets = view.table("assets")
    claimed: dict[str, str] = {}
    for group in view.table("groups"):
        owners = set()
        for asset_id in group.member_asset_ids:
            asset = assets.get(asset_id)
            if asset is None:
                _fail(f"group {group.id} references missing asset {asset_id}")
            if asset_id in claimed:
                _fail(f"asset {asset_id} belongs to two groups")
            claimed[asset_id] = group.id
            if asset.group_id != group.id:
                _fail(f"asset {asset_id} does not point back at group {group.id}")
            owners.add(asset.owner_unit_id)
        if len(owners) > 1:
            _fail(f"group {group.id} spans multiple owner units")
    for asset in assets:
        if asset.group_id and claimed.get(asset.id) != asset.group_id:
            _fail(f"asset {asset.id} points at group {asset.group_id} without membership")


def _check_requests(view: View) -> None:
    for request in view.table("requests"):
        if request.requester_id not in view.table("users"):
            _fail(f"request {request.id} has a missing requester")
        slots = len(request.route)
        seen_slots = set()
        for approval in request.approvals:
            if not 0 <= approval.slot_index < slots:
                _fail(f"request {request.id} approval references slot {approval.slot_index}")
            if approval.slot_index in seen_slots:
                _fail(f"request {request.id} slot {approval.slot_index} decided twice")
            seen_slots.add(approval.slot_index)
        if request.status in (RequestStatus.APPROVED, RequestStatus.AWAITING_EXECUTION,
                              RequestStatus.EXECUTED):
            approved = {a.slot_index for a in request.approvals
                        if a.decision.value == "approve"}
            if approved != set(range(slots)):
                _fail(f"request {request.id} is {request.status.value} with unfilled slots")


def _check_audit(view: View) -> None:
    seqs = sorted(r.seq for r in view.table("audit"))
    if seqs != list(range(1, len(seqs) + 1)):
        _fail("audit sequence has gaps or duplicates")
