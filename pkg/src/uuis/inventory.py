"""Asset and location lifecycle: add, modify, direct transfers, returns,
grouping, the asset-type catalog, request execution effects, and bulk CSV
import.

Ownership changes ride on the request workflow; the only mutations here
that touch ``owner_unit_id`` are request execution (:func:`apply_request`)
and explicit re-homing by an actor whose authority covers both units.
"""

from __future__ import annotations

import csv
import dataclasses
import io

from .errors import (
    AssetUnavailable,
    Conflict,
    CrossUnitTransfer,
    DuplicateName,
    DuplicateRoom,
    DuplicateSerial,
    ImmutableField,
    InvalidState,
    LocationOccupied,
    MixedOwnership,
    NotFound,
    PermissionDenied,
    UnknownType,
    ValidationFailed,
)
from .model import (
    Asset,
    AssetGroup,
    AssetKind,
    AssetState,
    AssetTypeDef,
    Location,
    PermissionAction,
    Request,
    RequestKind,
    ReturnCondition,
    UnitKind,
    record_to_doc,
)
from .storage import Txn, View

BULK_HEADER = ("serial_number", "type", "owner_unit", "building", "floor", "room")
BULK_MAX_ROWS = 10_000


def find_asset_by_serial(db: View, serial: str) -> Asset | None:
    """Resolve a serial among non-retired assets (retired serials are free)."""
    for asset in db.assets:
        if asset.serial_number == serial and asset.state is not AssetState.OUT_OF_INVENTORY:
            return asset
    return None


def find_type_by_name(db: View, name: str) -> AssetTypeDef | None:
    for type_def in db.asset_types:
        if type_def.name == name:
            return type_def
    return None


def find_location_by_room(db: View, building: str, floor: str, room: str) -> Location | None:
    for location in db.locations:
        if location.room_key == (building, floor, room):
            return location
    return None


def _check(db: View, actor_id: str, action: PermissionAction, unit_id: str) -> None:
    from . import authz

    if not authz.check(db, actor_id, action, unit_id):
        raise PermissionDenied(f"{action.value} not held over unit {unit_id}")


def add_asset(txn: Txn, actor_id: str, serial: str, type_name: str,
              owner_unit_id: str, location_id: str | None = None,
              properties: dict[str, str] | None = None) -> Asset:
    if not serial.strip():
        raise ValidationFailed("serial number must not be blank")
    owner = txn.org_units.require(owner_unit_id)
    if owner.kind is UnitKind.EXTERNAL:
        raise ValidationFailed("external units cannot own assets")
    _check(txn, actor_id, PermissionAction.ASSET_CREATE, owner_unit_id)
    type_def = find_type_by_name(txn, type_name)
    if type_def is None:
        raise UnknownType(
            f"asset type {type_name!r} is not in the catalog; "
            "file an exception request to have IT add it"
        )
    if location_id is not None:
        txn.locations.require(location_id)
    if find_asset_by_serial(txn, serial) is not None:
        raise DuplicateSerial(f"serial {serial!r} already in inventory")
    asset = Asset(
        id=txn.new_id("assets"),
        serial_number=serial.strip(),
        type_id=type_def.id,
        owner_unit_id=owner_unit_id,
        location_id=location_id,
        properties=dict(properties or {}),
    )
    txn.put("assets", asset)
    txn.record(actor_id, "asset.create", "asset", asset.id, after=record_to_doc(asset))
    return asset


_MODIFIABLE_ASSET_FIELDS = {"serial_number", "type", "owner_unit_id", "location_id", "properties"}


def modify_asset(txn: Txn, actor_id: str, asset_id: str, changes: dict) -> Asset:
    asset = txn.assets.require(asset_id)
    _check(txn, actor_id, PermissionAction.ASSET_EDIT, asset.owner_unit_id)
    if "id" in changes:
        raise ImmutableField("asset ids never change")
    unsupported = set(changes) - _MODIFIABLE_ASSET_FIELDS
    if unsupported:
        raise ValidationFailed(
            f"not editable here: {sorted(unsupported)} "
            "(state and holder change through returns and request execution)"
        )
    if asset.state is AssetState.OUT_OF_INVENTORY:
        raise InvalidState("asset is out of inventory and cannot be modified")
    before = record_to_doc(asset)

    if "serial_number" in changes:
        serial = str(changes["serial_number"]).strip()
        if not serial:
            raise ValidationFailed("serial number must not be blank")
        clash = find_asset_by_serial(txn, serial)
        if clash is not None and clash.id != asset_id:
            raise DuplicateSerial(f"serial {serial!r} already in inventory")
        asset = dataclasses.replace(asset, serial_number=serial)
    if "type" in changes:
        type_def = find_type_by_name(txn, str(changes["type"]))
        if type_def is None:
            raise UnknownType(f"asset type {changes['type']!r} is not in the catalog")
        asset = dataclasses.replace(asset, type_id=type_def.id)
    if "owner_unit_id" in changes and changes["owner_unit_id"] != asset.owner_unit_id:
        new_owner = txn.org_units.require(changes["owner_unit_id"])
        if new_owner.kind is UnitKind.EXTERNAL:
            raise ValidationFailed("external units cannot own assets")
        if asset.group_id is not None:
            raise MixedOwnership("grouped assets move owners as a group, via transfer")
        _check(txn, actor_id, PermissionAction.ASSET_EDIT, new_owner.id)
        asset = dataclasses.replace(asset, owner_unit_id=new_owner.id)
    if "location_id" in changes:
        if changes["location_id"] is not None:
            txn.locations.require(changes["location_id"])
        asset = dataclasses.replace(asset, location_id=changes["location_id"])
    if "properties" in changes:
        properties = {str(k): str(v) for k, v in dict(changes["properties"]).items()}
        asset = dataclasses.replace(asset, properties=properties)

    txn.put("assets", asset)
    txn.record(actor_id, "asset.edit", "asset", asset.id,
              before=before, after=record_to_doc(asset))
    return asset


def transfer_direct(txn: Txn, actor_id: str, asset_id: str, new_location_id: str,
                    new_holder_id: str | None = None) -> Asset:
    """Same-department move: no request object, just the location/holder."""
    asset = txn.assets.require(asset_id)
    _check(txn, actor_id, PermissionAction.ASSET_EDIT, asset.owner_unit_id)
    location = txn.locations.require(new_location_id)
    if location.owner_unit_id != asset.owner_unit_id:
        raise CrossUnitTransfer(
            "destination belongs to another unit; file a transfer request"
        )
    if asset.state is AssetState.OUT_OF_INVENTORY:
        raise InvalidState("asset is out of inventory")
    if asset.state is AssetState.AWAITING_TRANSFER:
        raise InvalidState("asset is locked by an approved transfer")
    before = record_to_doc(asset)
    if new_holder_id is not None:
        txn.users.require(new_holder_id)
        state = AssetState.BORROWED
    elif asset.state is AssetState.BORROWED:
        state = AssetState.AVAILABLE
    else:
        state = asset.state
    asset = dataclasses.replace(asset, location_id=new_location_id,
                                holder_user_id=new_holder_id, state=state)
    txn.put("assets", asset)
    txn.record(actor_id, "asset.transfer_direct", "asset", asset.id,
              before=before, after=record_to_doc(asset))
    return asset


def return_asset(txn: Txn, actor_id: str, asset_id: str,
                 condition: ReturnCondition) -> Asset:
    asset = txn.assets.require(asset_id)
    _check(txn, actor_id, PermissionAction.ASSET_EDIT, asset.owner_unit_id)
    if asset.state not in (AssetState.BORROWED, AssetState.RESERVED):
        raise InvalidState(f"nothing to return: asset is {asset.state.value}")
    before = record_to_doc(asset)
    state = AssetState.AVAILABLE if condition is ReturnCondition.OK else AssetState.DAMAGED
    asset = dataclasses.replace(asset, state=state, holder_user_id=None)
    txn.put("assets", asset)
    txn.record(actor_id, "asset.return", "asset", asset.id,
              before=before, after=record_to_doc(asset))
    return asset


# --- request execution ------------------------------------------------------


def _group_members(db: View, asset: Asset) -> list[Asset]:
    if asset.group_id is None:
        return [asset]
    group = db.groups.require(asset.group_id)
    return [db.assets.require(member_id) for member_id in sorted(group.member_asset_ids)]


def mark_transfer_pending(txn: Txn, request: Request) -> list[Asset]:
    """Lock a transfer request's assets (whole groups) at final approval."""
    if request.kind is not RequestKind.TRANSFER:
        return []
    marked = []
    seen: set[str] = set()  # two lines may name members of one group
    for line in request.lines:
        if not line.asset_serial:
            continue
        asset = find_asset_by_serial(txn, line.asset_serial)
        if asset is None:
            raise AssetUnavailable(f"asset {line.asset_serial!r} no longer in inventory")
        for member in _group_members(txn, asset):
            if member.id in seen:
                continue
            seen.add(member.id)
            if member.state is not AssetState.AVAILABLE:
                raise AssetUnavailable(
                    f"asset {member.serial_number!r} is {member.state.value}"
                )
            member = dataclasses.replace(member, state=AssetState.AWAITING_TRANSFER)
            txn.put("assets", member)
            marked.append(member)
    return marked


def apply_request(txn: Txn, request: Request) -> list[Asset]:
    """Inventory effects of an executed request.

    Called by the workflow inside its own transaction. Exception requests
    have no mechanical effect (IT acts on them out of band).
    """
    mutated: list[Asset] = []
    if request.kind is RequestKind.EXCEPTION:
        return mutated
    seen: set[str] = set()
    for line in request.lines:
        if not line.asset_serial:
            continue
        asset = find_asset_by_serial(txn, line.asset_serial)
        if asset is None:
            raise InvalidState(f"asset {line.asset_serial!r} no longer in inventory")
        if asset.id in seen:
            continue
        if request.kind is RequestKind.BORROW:
            if asset.state is not AssetState.AVAILABLE:
                raise InvalidState(f"asset changed since approval: {asset.state.value}")
            seen.add(asset.id)
            asset = dataclasses.replace(asset, state=AssetState.BORROWED,
                                        holder_user_id=request.requester_id)
            txn.put("assets", asset)
            mutated.append(asset)
        elif request.kind is RequestKind.RESERVE:
            if asset.state is not AssetState.AVAILABLE:
                raise InvalidState(f"asset changed since approval: {asset.state.value}")
            seen.add(asset.id)
            asset = dataclasses.replace(asset, state=AssetState.RESERVED)
            txn.put("assets", asset)
            mutated.append(asset)
        elif request.kind is RequestKind.TRANSFER:
            destination = txn.locations.require(line.location_id)
            dest_unit = txn.org_units.require(destination.owner_unit_id)
            for member in _group_members(txn, asset):
                if member.id in seen:
                    continue
                seen.add(member.id)
                if member.state is not AssetState.AWAITING_TRANSFER:
                    raise InvalidState(
                        f"asset changed since approval: {member.state.value}"
                    )
                if dest_unit.kind is UnitKind.EXTERNAL:
                    # Assets never take an external owner; leaving the
                    # university retires them with ownership kept for audit.
                    member = dataclasses.replace(
                        member, state=AssetState.OUT_OF_INVENTORY,
                        holder_user_id=None, location_id=destination.id,
                    )
                else:
                    member = dataclasses.replace(
                        member, owner_unit_id=dest_unit.id,
                        state=AssetState.AVAILABLE, holder_user_id=None,
                        location_id=destination.id,
                    )
                txn.put("assets", member)
                mutated.append(member)
    return mutated


# --- locations --------------------------------------------------------------


def create_location(txn: Txn, actor_id: str, building: str, floor: str, room: str,
                    owner_unit_id: str, capacity: int | None = None) -> Location:
    actor = txn.users.require(actor_id)
    if actor.level != 4:
        raise PermissionDenied(
            "only IT creates locations; file an exception request"
        )
    if not (building.strip() and floor.strip() and room.strip()):
        raise ValidationFailed("building, floor, and room are all required")
    txn.org_units.require(owner_unit_id)
    if capacity is not None and capacity < 0:
        raise ValidationFailed("capacity cannot be negative")
    if find_location_by_room(txn, building.strip(), floor.strip(), room.strip()):
        raise DuplicateRoom(f"location {building}/{floor}/{room} already exists")
    location = Location(
        id=txn.new_id("locations"),
        building=building.strip(), floor=floor.strip(), room=room.strip(),
        owner_unit_id=owner_unit_id, capacity=capacity,
    )
    txn.put("locations", location)
    txn.record(actor_id, "location.create", "location", location.id,
              after=record_to_doc(location))
    return location


_STRUCTURAL_LOCATION_FIELDS = {"building", "floor", "room"}


def edit_location(txn: Txn, actor_id: str, location_id: str, changes: dict) -> Location:
    location = txn.locations.require(location_id)
    unsupported = set(changes) - (_STRUCTURAL_LOCATION_FIELDS | {"owner_unit_id", "capacity"})
    if unsupported:
        raise ValidationFailed(f"unsupported location fields: {sorted(unsupported)}")
    structural = set(changes) & _STRUCTURAL_LOCATION_FIELDS
    if structural:
        actor = txn.users.require(actor_id)
        if actor.level != 4:
            raise PermissionDenied("floor structure changes are IT-only")
    else:
        _check(txn, actor_id, PermissionAction.LOCATION_EDIT, location.owner_unit_id)
    before = record_to_doc(location)
    if "capacity" in changes and changes["capacity"] is not None:
        try:
            changes = {**changes, "capacity": int(changes["capacity"])}
        except (TypeError, ValueError):
            raise ValidationFailed("capacity must be an integer") from None
    updated = dataclasses.replace(location, **{
        key: (str(value).strip() if key in _STRUCTURAL_LOCATION_FIELDS else value)
        for key, value in changes.items()
    })
    if updated.capacity is not None and updated.capacity < 0:
        raise ValidationFailed("capacity cannot be negative")
    txn.org_units.require(updated.owner_unit_id)
    clash = find_location_by_room(txn, *updated.room_key)
    if clash is not None and clash.id != location_id:
        raise DuplicateRoom(f"location {updated.room_key} already exists")
    txn.put("locations", updated)
    txn.record(actor_id, "location.edit", "location", location_id,
              before=before, after=record_to_doc(updated))
    return updated


def delete_location(txn: Txn, actor_id: str, location_id: str) -> None:
    location = txn.locations.require(location_id)
    _check(txn, actor_id, PermissionAction.LOCATION_DELETE, location.owner_unit_id)
    occupants = [a for a in txn.assets if a.location_id == location_id]
    if occupants:
        raise LocationOccupied(f"{len(occupants)} asset(s) still located there")
    before = record_to_doc(location)
    txn.delete("locations", location_id)
    txn.record(actor_id, "location.delete", "location", location_id, before=before)


# --- groups and the type catalog ---------------------------------------------


def group_assets(txn: Txn, actor_id: str, name: str, asset_ids: list[str]) -> AssetGroup:
    if not asset_ids:
        raise ValidationFailed("a group needs at least one asset")
    if not name.strip():
        raise ValidationFailed("group name must not be blank")
    assets = [txn.assets.require(asset_id) for asset_id in asset_ids]
    owners = {a.owner_unit_id for a in assets}
    if len(owners) > 1:
        raise MixedOwnership("all grouped assets must share one owner unit")
    for asset in assets:
        if asset.group_id is not None:
            raise Conflict(f"asset {asset.serial_number!r} is already grouped")
        if asset.state is AssetState.OUT_OF_INVENTORY:
            raise InvalidState(f"asset {asset.serial_number!r} is out of inventory")
    if any(g.name == name.strip() for g in txn.groups):
        raise DuplicateName(f"group {name!r} already exists")
    _check(txn, actor_id, PermissionAction.ASSET_EDIT, owners.pop())
    group = AssetGroup(id=txn.new_id("groups"), name=name.strip(),
                       member_asset_ids=frozenset(asset_ids))
    txn.put("groups", group)
    for asset in assets:
        txn.put("assets", dataclasses.replace(asset, group_id=group.id))
    txn.record(actor_id, "asset_group.create", "asset_group", group.id,
              after=record_to_doc(group))
    return group


def ungroup(txn: Txn, actor_id: str, group_id: str) -> None:
    group = txn.groups.require(group_id)
    members = [txn.assets.require(member_id) for member_id in sorted(group.member_asset_ids)]
    if members:
        _check(txn, actor_id, PermissionAction.ASSET_EDIT, members[0].owner_unit_id)
    before = record_to_doc(group)
    for member in members:
        txn.put("assets", dataclasses.replace(member, group_id=None))
    txn.delete("groups", group_id)
    txn.record(actor_id, "asset_group.delete", "asset_group", group_id, before=before)


def define_asset_type(txn: Txn, actor_id: str, name: str, kind: AssetKind,
                      common_properties: list[str] | None = None) -> AssetTypeDef:
    actor = txn.users.require(actor_id)
    if actor.level != 4:
        raise PermissionDenied("only IT extends the asset type catalog")
    if not name.strip():
        raise ValidationFailed("type name must not be blank")
    properties = tuple(common_properties or ())
    if len(set(properties)) != len(properties):
        raise ValidationFailed("common properties must be unique")
    if find_type_by_name(txn, name.strip()) is not None:
        raise DuplicateName(f"asset type {name!r} already exists")
    type_def = AssetTypeDef(id=txn.new_id("asset_types"), name=name.strip(),
                            kind=kind, common_properties=properties)
    txn.put("asset_types", type_def)
    txn.record(actor_id, "asset_type.create", "asset_type", type_def.id,
              after=record_to_doc(type_def))
    return type_def


# --- bulk import --------------------------------------------------------------


def bulk_import(txn: Txn, actor_id: str, data: bytes) -> dict:
    """All-or-nothing CSV import: creates new serials, updates existing ones.

    The whole file is validated first; any bad row aborts the import with
    per-row diagnostics and the store untouched. Emits one audit record
    per row plus a summary record.
    """
    rows, prop_names, errors = _parse_bulk_file(data)

    from . import authz

    plan: list[tuple[str, Asset]] = []
    serials_seen: set[str] = set()
    for ordinal, cells in rows:
        row_errors = _validate_bulk_row(txn, actor_id, ordinal, cells, prop_names,
                                        serials_seen, authz)
        if row_errors:
            errors.extend(row_errors)
            continue
        plan.append(_plan_bulk_row(txn, cells, prop_names))
    if errors:
        raise ValidationFailed(_bulk_detail(errors), rows=errors)

    created = updated = 0
    for action, asset in plan:
        existing = find_asset_by_serial(txn, asset.serial_number)
        if action == "update":
            txn.put("assets", asset)
            txn.record(actor_id, "asset.update", "asset", asset.id,
                      before=record_to_doc(existing) if existing else None,
                      after=record_to_doc(asset))
            updated += 1
        else:
            txn.put("assets", asset)
            txn.record(actor_id, "asset.create", "asset", asset.id,
                      after=record_to_doc(asset))
            created += 1
    summary_id = txn.new_id("bulk_import")
    txn.record(actor_id, "asset.bulk_import", "bulk_import", summary_id,
              after={"created": created, "updated": updated, "rows": created + updated})
    return {"created": created, "updated": updated, "errors": []}


def _bulk_detail(errors: list[dict]) -> str:
    parts = [f"row {e['row']}, {e['column']}: {e['reason']}" for e in errors[:20]]
    if len(errors) > 20:
        parts.append(f"... and {len(errors) - 20} more")
    return "; ".join(parts)


def _parse_bulk_file(data: bytes):
    errors: list[dict] = []
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        return [], [], [{"row": 0, "column": "", "reason": "file is not valid UTF-8"}]
    raw_rows = [row for row in csv.reader(io.StringIO(text))
                if any(cell.strip() for cell in row)]
    if not raw_rows:
        return [], [], [{"row": 0, "column": "", "reason": "missing header row"}]
    header = [cell.strip() for cell in raw_rows[0]]
    if tuple(header[: len(BULK_HEADER)]) != BULK_HEADER:
        return [], [], [{
            "row": 0, "column": "",
            "reason": f"header must start with {','.join(BULK_HEADER)}",
        }]
    prop_names = []
    for cell in header[len(BULK_HEADER):]:
        if not cell.startswith("prop:") or not cell[5:]:
            return [], [], [{"row": 0, "column": cell,
                             "reason": "extra columns must be prop:<name>"}]
        prop_names.append(cell[5:])
    if len(set(prop_names)) != len(prop_names):
        return [], [], [{"row": 0, "column": "", "reason": "duplicate prop: columns"}]
    data_rows = raw_rows[1:]
    if not data_rows:
        return [], [], [{"row": 0, "column": "", "reason": "no data rows"}]
    if len(data_rows) > BULK_MAX_ROWS:
        return [], [], [{"row": 0, "column": "",
                         "reason": f"more than {BULK_MAX_ROWS} data rows"}]
    rows = []
    expected = len(BULK_HEADER) + len(prop_names)
    for ordinal, cells in enumerate(data_rows, start=1):
        if len(cells) != expected:
            errors.append({"row": ordinal, "column": "",
                           "reason": f"expected {expected} cells, got {len(cells)}"})
            continue
        rows.append((ordinal, [cell.strip() for cell in cells]))
    return rows, prop_names, errors


def _resolve_bulk_unit(db: View, token: str):
    unit = db.org_units.get(token)
    if unit is not None:
        return unit
    matches = [u for u in db.org_units if u.name == token]
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise ValidationFailed(f"unit name {token!r} is ambiguous; use its id")
    return None


def _validate_bulk_row(db: View, actor_id: str, ordinal: int, cells: list[str],
                       prop_names: list[str], serials_seen: set[str], authz) -> list[dict]:
    errors = []
    serial, type_name, owner_token, building, floor, room = cells[: len(BULK_HEADER)]

    def err(column: str, reason: str) -> None:
        errors.append({"row": ordinal, "column": column, "reason": reason})

    if not serial:
        err("serial_number", "serial is required")
    elif serial in serials_seen:
        err("serial_number", f"serial {serial!r} repeats within the file")
    else:
        serials_seen.add(serial)

    if find_type_by_name(db, type_name) is None:
        err("type", f"unknown type {type_name!r}")

    owner = None
    if not owner_token:
        err("owner_unit", "owner unit is required")
    else:
        try:
            owner = _resolve_bulk_unit(db, owner_token)
        except ValidationFailed as exc:
            err("owner_unit", exc.detail)
        else:
            if owner is None:
                err("owner_unit", f"unknown unit {owner_token!r}")
            elif owner.kind is UnitKind.EXTERNAL:
                err("owner_unit", "external units cannot own assets")
                owner = None

    location_cells = (building, floor, room)
    if any(location_cells) and not all(location_cells):
        err("building", "location needs building, floor, and room together")
    elif all(location_cells) and find_location_by_room(db, building, floor, room) is None:
        err("building", f"unknown location {building}/{floor}/{room}")

    if owner is not None and serial:
        existing = find_asset_by_serial(db, serial)
        if existing is None:
            if not authz.check(db, actor_id, PermissionAction.ASSET_CREATE, owner.id):
                err("owner_unit", "permission denied: asset:create over this unit")
        else:
            if not authz.check(db, actor_id, PermissionAction.ASSET_EDIT,
                               existing.owner_unit_id):
                err("serial_number", "permission denied: asset:edit over current owner")
            elif existing.owner_unit_id != owner.id:
                if existing.group_id is not None:
                    err("owner_unit", "grouped assets change owner via transfer requests")
                elif not authz.check(db, actor_id, PermissionAction.ASSET_EDIT, owner.id):
                    err("owner_unit", "permission denied: asset:edit over new owner")
    return errors


def _plan_bulk_row(txn: Txn, cells: list[str], prop_names: list[str]) -> tuple[str, Asset]:
    serial, type_name, owner_token, building, floor, room = cells[: len(BULK_HEADER)]
    type_def = find_type_by_name(txn, type_name)
    owner = _resolve_bulk_unit(txn, owner_token)
    location = (find_location_by_room(txn, building, floor, room)
                if all((building, floor, room)) else None)
    properties = {name: value for name, value in zip(prop_names, cells[len(BULK_HEADER):])
                  if value}
    existing = find_asset_by_serial(txn, serial)
    if existing is not None:
        updated = dataclasses.replace(
            existing, type_id=type_def.id, owner_unit_id=owner.id,
            location_id=location.id if location else None, properties=properties,
        )
        return "update", updated
    asset = Asset(
        id=txn.new_id("assets"),
        serial_number=serial,
        type_id=type_def.id,
        owner_unit_id=owner.id,
        location_id=location.id if location else None,
        properties=properties,
    )
    return "create", asset
