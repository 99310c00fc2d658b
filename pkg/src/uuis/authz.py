"""Effective permissions, scoped checks, delegation, permission groups.

A user's effective permission set is their level's predefined defaults
plus everything delegated to them through live grants. Checks are pure
subtree containment: holding ``(action, scope)`` authorizes the action
on any unit at or below ``scope``. Grants have snapshot semantics — a
grantor later losing authority does not retro-revoke what they granted;
revocation is explicit.
"""

from __future__ import annotations

import dataclasses

from .errors import (
    DuplicateName,
    EmptyDelegation,
    ExceedsGrantorAuthority,
    InactiveUser,
    NotFound,
    PermissionDenied,
    ValidationFailed,
)
from .model import (
    Grant,
    PermissionAction,
    PermissionGroup,
    ScopedPermission,
    record_to_doc,
)
from .orgs import is_descendant, university_root
from .storage import Txn, View

#: Actions every department/faculty/university administrator holds over
#: their own subtree: request, asset, and location control, search,
#: reports, and user directory reads.
ADMIN_ACTIONS: frozenset[PermissionAction] = frozenset(
    {
        PermissionAction.REQUEST_CREATE,
        PermissionAction.REQUEST_LIST,
        PermissionAction.REQUEST_SHOW,
        PermissionAction.REQUEST_EDIT,
        PermissionAction.REQUEST_APPROVE,
        PermissionAction.ASSET_CREATE,
        PermissionAction.ASSET_LIST,
        PermissionAction.ASSET_SHOW,
        PermissionAction.ASSET_EDIT,
        PermissionAction.LOCATION_CREATE,
        PermissionAction.LOCATION_LIST,
        PermissionAction.LOCATION_SHOW,
        PermissionAction.LOCATION_EDIT,
        PermissionAction.LOCATION_DELETE,
        PermissionAction.SEARCH_SIMPLE,
        PermissionAction.SEARCH_ADVANCED,
        PermissionAction.REPORT_LIST,
        PermissionAction.REPORT_SHOW,
        PermissionAction.USER_LIST,
        PermissionAction.USER_SHOW,
    }
)

#: Level 3 additionally manages the org tree itself and user permissions.
UNIVERSITY_ACTIONS: frozenset[PermissionAction] = ADMIN_ACTIONS | {
    PermissionAction.UNIVERSITY_PART_CREATE,
    PermissionAction.UNIVERSITY_PART_LIST,
    PermissionAction.UNIVERSITY_PART_SHOW,
    PermissionAction.UNIVERSITY_PART_EDIT,
    PermissionAction.UNIVERSITY_PART_DELETE,
    PermissionAction.USER_EDIT,
}

ALL_ACTIONS: frozenset[PermissionAction] = frozenset(PermissionAction)


def default_permissions(db: View, level: int, home_unit_id: str) -> frozenset[ScopedPermission]:
    """Predefined permission set for an administrative level.

    Level 0 may only create requests at home. Levels 1-3 hold the full
    administrator action set over their department, faculty, and
    university respectively. Level 4 holds every action, audit included,
    over the university root.
    """
    if level not in range(5):
        raise ValidationFailed(f"level must be 0..4, got {level}")
    db.org_units.require(home_unit_id)
    if level == 0:
        return frozenset({ScopedPermission(PermissionAction.REQUEST_CREATE, home_unit_id)})
    if level in (1, 2):
        return frozenset(ScopedPermission(a, home_unit_id) for a in ADMIN_ACTIONS)
    if level == 3:
        return frozenset(ScopedPermission(a, home_unit_id) for a in UNIVERSITY_ACTIONS)
    root = university_root(db)
    return frozenset(ScopedPermission(a, root.id) for a in ALL_ACTIONS)


def effective_permissions(db: View, user_id: str) -> frozenset[ScopedPermission]:
    """Level defaults plus everything delegated via non-revoked grants."""
    user = db.users.require(user_id)
    if not user.active:
        raise InactiveUser(f"user {user.username!r} is deactivated")
    permissions = set(default_permissions(db, user.level, user.home_unit_id))
    for grant in db.grants:
        if grant.grantee_id == user_id and grant.live:
            permissions.update(grant.permissions)
    return frozenset(permissions)


def check(db: View, user_id: str, action: PermissionAction, target_unit_id: str) -> bool:
    """True iff some effective permission's scope covers ``target_unit_id``."""
    db.org_units.require(target_unit_id)
    user = db.users.require(user_id)
    if not user.active:
        return False
    for permission in effective_permissions(db, user_id):
        if permission.action is not action:
            continue
        if permission.scope_unit_id not in db.org_units:
            continue  # scope unit deleted since the grant; covers nothing
        if is_descendant(db, target_unit_id, permission.scope_unit_id):
            return True
    return False


def holds_anywhere(db: View, user_id: str, action: PermissionAction) -> bool:
    """True iff the user holds ``action`` over at least one scope."""
    return any(p.action is action for p in effective_permissions(db, user_id))


def covers(db: View, held: frozenset[ScopedPermission], wanted: ScopedPermission) -> bool:
    db.org_units.require(wanted.scope_unit_id)
    return any(
        p.action is wanted.action
        and p.scope_unit_id in db.org_units
        and is_descendant(db, wanted.scope_unit_id, p.scope_unit_id)
        for p in held
    )


def delegate(txn: Txn, grantor_id: str, grantee_id: str,
             permissions: set[ScopedPermission] | frozenset[ScopedPermission]) -> Grant:
    """Delegate a permission subset; the grantee becomes an inventory admin.

    The delegated set must be covered by the grantor's effective set at
    this moment; the grantor's set is captured in the audit record so the
    subset rule stays re-checkable from the log alone.
    """
    if not permissions:
        raise EmptyDelegation("a delegation needs at least one permission")
    grantor = txn.users.require(grantor_id)
    grantee = txn.users.require(grantee_id)
    if not grantor.active or not grantee.active:
        raise InactiveUser("both sides of a delegation must be active")
    grantor_effective = effective_permissions(txn, grantor_id)
    for wanted in permissions:
        if not covers(txn, grantor_effective, wanted):
            raise ExceedsGrantorAuthority(
                f"{grantor.username!r} cannot delegate {wanted}: not within own authority"
            )
    grant = Grant(
        id=txn.new_id("grants"),
        grantor_id=grantor_id,
        grantee_id=grantee_id,
        permissions=frozenset(permissions),
        created_at=txn.now(),
    )
    txn.put("grants", grant)
    txn.record(
        grantor_id, "grant.create", "grant", grant.id,
        after={
            "grant": record_to_doc(grant),
            "grantor_effective": sorted(str(p) for p in grantor_effective),
        },
    )
    txn.notify(
        grantee_id,
        "Permissions delegated to you",
        f"{grantor.username} delegated: " + ", ".join(sorted(str(p) for p in permissions)),
    )
    return grant


def revoke(txn: Txn, actor_id: str, grant_id: str) -> Grant:
    """Mark a grant revoked. Idempotent: revoking twice is a no-op success."""
    grant = txn.grants.require(grant_id)
    if not grant.live:
        return grant
    actor = txn.users.require(actor_id)
    grantee = txn.users.require(grant.grantee_id)
    if actor.id != grant.grantor_id and not check(
        txn, actor_id, PermissionAction.USER_EDIT, grantee.home_unit_id
    ):
        raise PermissionDenied("only the grantor or a user manager may revoke")
    before = record_to_doc(grant)
    grant = dataclasses.replace(grant, revoked_at=txn.now())
    txn.put("grants", grant)
    txn.record(actor_id, "grant.revoke", "grant", grant.id,
              before=before, after=record_to_doc(grant))
    return grant


def create_permission_group(txn: Txn, actor_id: str, name: str,
                            actions: set[PermissionAction]) -> PermissionGroup:
    actor = txn.users.require(actor_id)
    if actor.level != 4:
        raise PermissionDenied("only IT administrators define permission groups")
    if not actions:
        raise ValidationFailed("a permission group needs at least one action")
    if not name.strip():
        raise ValidationFailed("group name must not be blank")
    if any(g.name == name.strip() for g in txn.permission_groups):
        raise DuplicateName(f"permission group {name!r} already exists")
    group = PermissionGroup(id=txn.new_id("permission_groups"), name=name.strip(),
                            actions=frozenset(actions))
    txn.put("permission_groups", group)
    txn.record(actor_id, "permission_group.create", "permission_group", group.id,
              after=record_to_doc(group))
    return group


def grant_group(txn: Txn, actor_id: str, grantee_id: str, group_id: str,
                scope_unit_id: str) -> Grant:
    """Expand a permission group over one scope and delegate the result."""
    group = txn.permission_groups.require(group_id)
    txn.org_units.require(scope_unit_id)
    expanded = {ScopedPermission(action, scope_unit_id) for action in group.actions}
    return delegate(txn, actor_id, grantee_id, expanded)
