"""Audit trail reads and the notification outbox.

Audit records are written by the operation that performs the mutation
(via ``txn.audit``) so they commit or vanish together with it; this
module only reads them back. Notifications stand in for the email
requirement: workflow decisions enqueue them transactionally and a
drain worker hands them to a pluggable transport, at-least-once. The
default transport appends JSON lines to a local outbox file so the whole
system runs offline.
"""

from __future__ import annotations

import dataclasses
import json
import threading
from datetime import datetime
from pathlib import Path
from typing import Protocol

from .errors import PermissionDenied, TransportFailure
from .model import AuditRecord, Notification, PermissionAction
from .orgs import university_root
from .storage import Store, View

SUMMARY_ACTIONS = frozenset({"asset.bulk_import"})

_drain_lock = threading.Lock()  # one drain at a time, process-wide


def is_summary_record(record: AuditRecord) -> bool:
    return record.action in SUMMARY_ACTIONS


def _require_audit_permission(db: View, actor_id: str, action: PermissionAction) -> None:
    from . import authz

    root = university_root(db)
    if not authz.check(db, actor_id, action, root.id):
        raise PermissionDenied(f"{action.value} is not held over the university")


def list_audit(db: View, actor_id: str, *, actor: str | None = None,
               entity_type: str | None = None,
               since: datetime | None = None, until: datetime | None = None,
               offset: int = 0, limit: int = 100) -> list[AuditRecord]:
    """Filtered, seq-ordered page of the audit trail (level-4 by default)."""
    _require_audit_permission(db, actor_id, PermissionAction.AUDIT_LIST)
    records = sorted(db.audit.values(), key=lambda r: r.seq)
    selected = [
        record for record in records
        if (actor is None or record.actor_id == actor)
        and (entity_type is None or record.entity_type == entity_type)
        and (since is None or record.at >= since)
        and (until is None or record.at <= until)
    ]
    return selected[offset:offset + limit]


def show_audit(db: View, actor_id: str, seq: int) -> AuditRecord:
    _require_audit_permission(db, actor_id, PermissionAction.AUDIT_SHOW)
    return db.audit.require(seq)


class Transport(Protocol):
    def send(self, notification: Notification) -> None:
        """Deliver one notification; raise TransportFailure to retry later."""


class FileTransport:
    """Appends one JSON object per notification to a local outbox file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def send(self, notification: Notification) -> None:
        line = json.dumps(
            {
                "id": notification.id,
                "recipient": notification.recipient_id,
                "subject": notification.subject,
                "body": notification.body,
                "created_at": notification.created_at.isoformat(),
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        try:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
        except OSError as exc:
            raise TransportFailure(f"outbox file write failed: {exc}") from exc


def drain_outbox(store: Store, transport: Transport) -> int:
    """Hand undelivered notifications to the transport; at-least-once.

    A notification is marked delivered only after the transport accepted
    it, so a crash in between re-sends rather than drops. Failures leave
    it queued for the next drain.
    """
    with _drain_lock:
        pending = sorted(
            (n for n in store.view().notifications if not n.delivered),
            key=lambda n: n.id,
        )
        delivered = 0
        for notification in pending:
            try:
                transport.send(notification)
            except TransportFailure:
                continue
            def _mark(txn, notification=notification):
                current = txn.notifications.require(notification.id)
                txn.put("notifications", dataclasses.replace(current, delivered=True))
            store.transact(_mark)
            delivered += 1
        return delivered
