"""Request lifecycle: creation forms, approval routing, decisions, execution.

Routing rules for transfers:
  same department        -> no request needed (empty route)
  same faculty           -> department admin, then faculty admin — waived
                            entirely when the requester already holds
                            level-2+ authority over the source
  across faculties       -> the source faculty (level 2 or higher fills it)
  leaving the university -> the university (level 3+)

A rejection by any slot holder is terminal; full approval moves the
request to the waiting-for-execution list in the same transaction, and the
requester is notified exactly once per terminal decision.
"""

from __future__ import annotations

import dataclasses

from . import inventory
from .errors import (
    AssetUnavailable,
    EmptyRequest,
    InvalidState,
    NotFound,
    PermissionDenied,
    SourceIsExternal,
    UnknownSerial,
    ValidationFailed,
)
from .model import (
    ApprovalRecord,
    AssetState,
    Decision,
    PermissionAction,
    Request,
    RequestForm,
    RequestKind,
    RequestLine,
    RequestStatus,
    RouteSlot,
    UnitKind,
    User,
    record_to_doc,
)
from .orgs import faculty_of, is_descendant, university_root
from .storage import Txn, View


def required_approvals(db: View, source_unit_id: str, dest_unit_id: str,
                       requester_id: str) -> tuple[RouteSlot, ...]:
    """Approval slots a transfer from source to destination must collect."""
    source = db.org_units.require(source_unit_id)
    dest = db.org_units.require(dest_unit_id)
    requester = db.users.require(requester_id)
    if source.kind is UnitKind.EXTERNAL:
        raise SourceIsExternal("external units own nothing to transfer")
    if dest.kind is UnitKind.EXTERNAL:
        return (RouteSlot(3, university_root(db).id),)
    if source.id == dest.id:
        return ()
    source_faculty = faculty_of(db, source.id)
    dest_faculty = faculty_of(db, dest.id)
    if source_faculty is not None and source_faculty == dest_faculty:
        if _requester_covers_source(db, requester, source.id):
            return ()
        return (RouteSlot(1, source.id), RouteSlot(2, source_faculty))
    return (RouteSlot(2, source_faculty or source.id),)


def _requester_covers_source(db: View, requester: User, source_unit_id: str) -> bool:
    if requester.level < 2:
        return False
    if requester.level == 4:
        return True
    return is_descendant(db, source_unit_id, requester.home_unit_id)


def _merge_slots(routes: list[tuple[RouteSlot, ...]]) -> tuple[RouteSlot, ...]:
    merged = {slot for route in routes for slot in route}
    return tuple(sorted(merged, key=lambda s: (s.required_level, s.scope_unit_id)))


def slot_satisfied(db: View, approver: User, slot: RouteSlot) -> bool:
    """An approver fills a slot with enough level and approve scope."""
    from . import authz

    if approver.level < slot.required_level:
        return False
    try:
        return authz.check(db, approver.id, PermissionAction.REQUEST_APPROVE,
                           slot.scope_unit_id)
    except NotFound:
        return False  # slot scope deleted since routing; nobody can fill it


def create_request(txn: Txn, actor_id: str, form: RequestForm, kind: RequestKind,
                   text: str = "", lines: list[RequestLine] | None = None) -> Request:
    """Validate a request form, compute its route, and persist it Pending.

    An empty route (same-department transfer, or a requester whose own
    authority already covers the source) auto-approves straight into the
    waiting-for-execution list.
    """
    from . import authz

    actor = txn.users.require(actor_id)
    if not authz.check(txn, actor_id, PermissionAction.REQUEST_CREATE, actor.home_unit_id):
        raise PermissionDenied("no request:create permission")
    lines = list(lines or [])

    if (form is RequestForm.EXCEPTION) != (kind is RequestKind.EXCEPTION):
        raise ValidationFailed("exception requests use the exception form, and only it")
    if form in (RequestForm.ADVANCED, RequestForm.EXCEPTION):
        if not authz.holds_anywhere(txn, actor_id, PermissionAction.SEARCH_SIMPLE):
            raise PermissionDenied("only the basic request form is available to you")
    if form is RequestForm.BASIC and not text.strip():
        raise EmptyRequest("a basic request needs its text")
    if form is RequestForm.ADVANCED:
        if not lines:
            raise EmptyRequest("an advanced request needs at least one asset line")
        if any(not line.asset_serial for line in lines):
            raise ValidationFailed("advanced request lines name assets by serial")
    if form is RequestForm.EXCEPTION:
        if not text.strip():
            raise EmptyRequest("an exception request needs its text")
        if lines:
            raise ValidationFailed("exception requests are free text, no asset lines")

    route = _route_for(txn, actor, form, kind, lines)
    request = Request(
        id=txn.new_id("requests"),
        requester_id=actor_id,
        form=form,
        kind=kind,
        text=text.strip(),
        lines=tuple(lines),
        route=route,
        approvals=(),
        status=RequestStatus.PENDING,
        created_at=txn.now(),
    )
    if not route:
        request = _finalize_approval(txn, request)
    txn.put("requests", request)
    txn.record(actor_id, "request.create", "request", request.id,
              after=_request_doc(request))
    return request


def _route_for(db: View, actor: User, form: RequestForm, kind: RequestKind,
               lines: list[RequestLine]) -> tuple[RouteSlot, ...]:
    if kind is RequestKind.EXCEPTION:
        return (RouteSlot(4, university_root(db).id),)
    routes: list[tuple[RouteSlot, ...]] = []
    for line in lines:
        asset = None
        if line.asset_serial:
            asset = inventory.find_asset_by_serial(db, line.asset_serial)
            if asset is None:
                raise UnknownSerial(f"no asset with serial {line.asset_serial!r}")
            if asset.state is not AssetState.AVAILABLE:
                raise AssetUnavailable(
                    f"asset {line.asset_serial!r} is {asset.state.value}, not available"
                )
        location = db.locations.require(line.location_id) if line.location_id else None
        if kind is RequestKind.TRANSFER:
            if asset is not None:
                if location is None:
                    raise ValidationFailed("transfer lines need a destination location")
                routes.append(required_approvals(db, asset.owner_unit_id,
                                                 location.owner_unit_id, actor.id))
        else:  # borrow / reserve
            if asset is not None:
                routes.append((RouteSlot(1, asset.owner_unit_id),))
            elif location is not None:
                routes.append((RouteSlot(1, location.owner_unit_id),))
    if not routes:
        return (RouteSlot(1, actor.home_unit_id),)
    return _merge_slots(routes)


def list_pending(db: View, approver_id: str) -> list[Request]:
    """Pending requests with at least one unfilled slot this user satisfies."""
    approver = db.users.require(approver_id)
    visible = [
        request
        for request in db.requests
        if request.status is RequestStatus.PENDING
        and any(slot_satisfied(db, approver, slot) for _, slot in request.unfilled_slots())
    ]
    visible.sort(key=lambda r: (r.created_at, r.id))
    return visible


def approve(txn: Txn, approver_id: str, request_id: str, note: str = "") -> Request:
    """Fill the lowest slot the approver satisfies; last slot finalizes."""
    request = txn.requests.require(request_id)
    approver = txn.users.require(approver_id)
    if request.status is not RequestStatus.PENDING:
        raise InvalidState(f"request is {request.status.value}, not pending")
    slot_index = _claimable_slot(txn, approver, request)
    before = _request_doc(request)
    record = ApprovalRecord(approver_id=approver_id, slot_index=slot_index,
                            decision=Decision.APPROVE, at=txn.now(), note=note)
    request = dataclasses.replace(request, approvals=request.approvals + (record,))
    if not request.unfilled_slots():
        request = _finalize_approval(txn, request)
    txn.put("requests", request)
    txn.record(approver_id, "request.approve", "request", request.id,
              before=before, after=_request_doc(request))
    return request


def reject(txn: Txn, approver_id: str, request_id: str, note: str = "") -> Request:
    """Terminal rejection by any slot holder, prior approvals notwithstanding."""
    request = txn.requests.require(request_id)
    approver = txn.users.require(approver_id)
    if request.status is not RequestStatus.PENDING:
        raise InvalidState(f"request is {request.status.value}, not pending")
    slot_index = _claimable_slot(txn, approver, request)
    before = _request_doc(request)
    record = ApprovalRecord(approver_id=approver_id, slot_index=slot_index,
                            decision=Decision.REJECT, at=txn.now(), note=note)
    request = dataclasses.replace(
        request, approvals=request.approvals + (record,),
        status=RequestStatus.REJECTED, resolved_at=txn.now(),
    )
    txn.put("requests", request)
    txn.record(approver_id, "request.reject", "request", request.id,
              before=before, after=_request_doc(request))
    requester = txn.users.require(request.requester_id)
    txn.notify(requester.id, f"Request {request.id} rejected",
               note or "Your request was rejected.")
    return request


def cancel(txn: Txn, actor_id: str, request_id: str) -> Request:
    """Requester withdraws a still-pending request; no notification."""
    request = txn.requests.require(request_id)
    if actor_id != request.requester_id:
        raise PermissionDenied("only the requester may cancel")
    if request.status is not RequestStatus.PENDING:
        raise InvalidState(f"request is {request.status.value}, not pending")
    before = _request_doc(request)
    request = dataclasses.replace(request, status=RequestStatus.CANCELLED,
                                  resolved_at=txn.now())
    txn.put("requests", request)
    txn.record(actor_id, "request.cancel", "request", request.id,
              before=before, after=_request_doc(request))
    return request


def mark_executed(txn: Txn, actor_id: str, request_id: str) -> Request:
    """Confirm the physical hand-over and apply the inventory effects."""
    from . import authz

    request = txn.requests.require(request_id)
    if request.status is not RequestStatus.AWAITING_EXECUTION:
        raise InvalidState(f"request is {request.status.value}, not awaiting execution")
    for unit_id in _owning_units(txn, request):
        if not authz.check(txn, actor_id, PermissionAction.ASSET_EDIT, unit_id):
            raise PermissionDenied(f"asset:edit not held over unit {unit_id}")
    before = _request_doc(request)
    inventory.apply_request(txn, request)
    request = dataclasses.replace(request, status=RequestStatus.EXECUTED)
    txn.put("requests", request)
    txn.record(actor_id, "request.execute", "request", request.id,
              before=before, after=_request_doc(request))
    return request


def _owning_units(db: View, request: Request) -> set[str]:
    units: set[str] = set()
    for line in request.lines:
        if line.asset_serial:
            asset = inventory.find_asset_by_serial(db, line.asset_serial)
            if asset is not None:
                units.add(asset.owner_unit_id)
        elif line.location_id and line.location_id in db.locations:
            units.add(db.locations.require(line.location_id).owner_unit_id)
    if not units:
        units.add(db.users.require(request.requester_id).home_unit_id)
    return units


def _claimable_slot(db: View, approver: User, request: Request) -> int:
    for index, slot in request.unfilled_slots():
        if slot_satisfied(db, approver, slot):
            return index
    raise PermissionDenied("no unfilled approval slot matches your authority")


def _finalize_approval(txn: Txn, request: Request) -> Request:
    """Pending -> Approved -> AwaitingExecution, atomically.

    Transfer assets (whole groups) get locked AwaitingTransfer here; a
    line whose asset is no longer available fails the approval and the
    whole transaction rolls back.
    """
    request = dataclasses.replace(request, status=RequestStatus.APPROVED,
                                  resolved_at=txn.now())
    inventory.mark_transfer_pending(txn, request)
    request = dataclasses.replace(request, status=RequestStatus.AWAITING_EXECUTION)
    txn.notify(request.requester_id, f"Request {request.id} approved",
               "Your request was approved and awaits execution.")
    return request


def _request_doc(request: Request) -> dict:
    return record_to_doc(request)
