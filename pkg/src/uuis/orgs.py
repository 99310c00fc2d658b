"""Org-tree management, the subtree scoping predicate, and user accounts.

The university hierarchy is a three-level tree (University > Faculty >
Department) plus detached External units that only ever receive transfers.
Every permission in the system scopes over a subtree of this tree, so
:func:`is_descendant` is the primitive the authorization layer leans on.
"""

from __future__ import annotations

import dataclasses

from . import security
from .errors import (
    DuplicateName,
    InvalidHierarchy,
    NotFound,
    PermissionDenied,
    UnitNotEmpty,
    ValidationFailed,
)
from .model import (
    LEVEL_HOME_KINDS,
    OrgUnit,
    PermissionAction,
    UnitKind,
    User,
    record_to_doc,
)
from .storage import Txn, View


def unit_path(db: View, unit_id: str) -> list[str]:
    """Ids from ``unit_id`` up to its root (inclusive, bottom-up)."""
    unit = db.org_units.require(unit_id)
    path = [unit.id]
    while unit.parent_id is not None:
        unit = db.org_units.require(unit.parent_id)
        path.append(unit.id)
    return path


def is_descendant(db: View, unit_id: str, ancestor_id: str) -> bool:
    """True iff ``ancestor_id`` is on the parent chain of ``unit_id`` or equals it."""
    db.org_units.require(ancestor_id)
    return ancestor_id in unit_path(db, unit_id)


def university_root(db: View) -> OrgUnit:
    for unit in db.org_units:
        if unit.kind is UnitKind.UNIVERSITY:
            return unit
    raise NotFound("no university root unit exists")


def faculty_of(db: View, unit_id: str) -> str | None:
    """Id of the faculty on the unit's parent chain (itself if a faculty)."""
    unit = db.org_units.require(unit_id)
    while unit is not None:
        if unit.kind is UnitKind.FACULTY:
            return unit.id
        unit = db.org_units.get(unit.parent_id) if unit.parent_id else None
    return None


def _validate_parentage(db: View, kind: UnitKind, parent_id: str | None) -> None:
    if kind is UnitKind.UNIVERSITY:
        if parent_id is not None:
            raise InvalidHierarchy("a university unit cannot have a parent")
        if any(u.kind is UnitKind.UNIVERSITY for u in db.org_units):
            raise InvalidHierarchy("a university root already exists")
        return
    if kind is UnitKind.EXTERNAL:
        if parent_id is not None:
            raise InvalidHierarchy("external units are detached and take no parent")
        return
    if parent_id is None:
        raise InvalidHierarchy(f"a {kind.value} needs a parent unit")
    parent = db.org_units.require(parent_id)
    wanted = UnitKind.UNIVERSITY if kind is UnitKind.FACULTY else UnitKind.FACULTY
    if parent.kind is not wanted:
        raise InvalidHierarchy(
            f"a {kind.value} must hang under a {wanted.value}, "
            f"not a {parent.kind.value}"
        )


def create_org_unit(txn: Txn, actor_id: str, name: str, kind: UnitKind,
                    parent_id: str | None = None) -> OrgUnit:
    from . import authz

    actor = txn.users.require(actor_id)
    if not name.strip():
        raise ValidationFailed("unit name must not be blank")
    _validate_parentage(txn, kind, parent_id)
    if parent_id is not None:
        allowed = authz.check(txn, actor_id, PermissionAction.UNIVERSITY_PART_CREATE, parent_id)
    else:
        # Detached kinds (external, the root itself) have no parent to scope
        # against; only IT may create them.
        allowed = actor.level == 4
    if not allowed:
        raise PermissionDenied("not allowed to create units here")
    unit = OrgUnit(id=txn.new_id("org_units"), name=name.strip(), kind=kind,
                   parent_id=parent_id)
    txn.put("org_units", unit)
    txn.record(actor_id, "org_unit.create", "org_unit", unit.id, after=record_to_doc(unit))
    return unit


def edit_org_unit(txn: Txn, actor_id: str, unit_id: str, changes: dict) -> OrgUnit:
    unit = txn.org_units.require(unit_id)
    from . import authz

    if not authz.check(txn, actor_id, PermissionAction.UNIVERSITY_PART_EDIT, unit_id):
        raise PermissionDenied("not allowed to edit this unit")
    unsupported = set(changes) - {"name"}
    if unsupported:
        raise ValidationFailed(
            f"only the unit name is editable, got {sorted(unsupported)}"
        )
    before = record_to_doc(unit)
    if "name" in changes:
        if not str(changes["name"]).strip():
            raise ValidationFailed("unit name must not be blank")
        unit = dataclasses.replace(unit, name=str(changes["name"]).strip())
    txn.put("org_units", unit)
    txn.record(actor_id, "org_unit.edit", "org_unit", unit.id,
              before=before, after=record_to_doc(unit))
    return unit


def delete_org_unit(txn: Txn, actor_id: str, unit_id: str) -> None:
    unit = txn.org_units.require(unit_id)
    from . import authz

    if not authz.check(txn, actor_id, PermissionAction.UNIVERSITY_PART_DELETE, unit_id):
        raise PermissionDenied("not allowed to delete this unit")
    if any(u.parent_id == unit_id for u in txn.org_units):
        raise UnitNotEmpty(f"unit {unit_id} still has child units")
    if any(u.home_unit_id == unit_id for u in txn.users):
        raise UnitNotEmpty(f"unit {unit_id} still has users homed on it")
    if any(a.owner_unit_id == unit_id for a in txn.assets):
        raise UnitNotEmpty(f"unit {unit_id} still owns assets")
    if any(l.owner_unit_id == unit_id for l in txn.locations):
        raise UnitNotEmpty(f"unit {unit_id} still owns locations")
    before = record_to_doc(unit)
    txn.delete("org_units", unit_id)
    txn.record(actor_id, "org_unit.delete", "org_unit", unit_id, before=before)


# --- users ----------------------------------------------------------------


def find_user_by_username(db: View, username: str) -> User | None:
    lowered = username.lower()
    for user in db.users:
        if user.username.lower() == lowered:
            return user
    return None


def _validate_level_home(db: View, level: int, home_unit_id: str) -> None:
    if level not in LEVEL_HOME_KINDS:
        raise ValidationFailed(f"level must be 0..4, got {level}")
    home = db.org_units.require(home_unit_id)
    if home.kind not in LEVEL_HOME_KINDS[level]:
        raise ValidationFailed(
            f"a level-{level} user cannot be homed at a {home.kind.value} unit"
        )


def create_user(txn: Txn, actor_id: str, username: str, password: str,
                level: int, home_unit_id: str) -> User:
    from . import authz

    if not username.strip():
        raise ValidationFailed("username must not be blank")
    _validate_level_home(txn, level, home_unit_id)
    if not authz.check(txn, actor_id, PermissionAction.USER_EDIT, home_unit_id):
        raise PermissionDenied("not allowed to manage users of this unit")
    actor = txn.users.require(actor_id)
    if level > actor.level:
        raise PermissionDenied("cannot create an account above your own level")
    if find_user_by_username(txn, username) is not None:
        raise DuplicateName(f"username {username!r} is taken")
    user = User(
        id=txn.new_id("users"),
        username=username.strip(),
        password_digest=security.hash_password(password),
        level=level,
        home_unit_id=home_unit_id,
    )
    txn.put("users", user)
    txn.record(actor_id, "user.create", "user", user.id, after=_user_doc(user))
    return user


def edit_user(txn: Txn, actor_id: str, user_id: str, changes: dict) -> User:
    from . import authz

    user = txn.users.require(user_id)
    if not authz.check(txn, actor_id, PermissionAction.USER_EDIT, user.home_unit_id):
        raise PermissionDenied("not allowed to manage this user")
    unsupported = set(changes) - {"level", "home_unit_id", "active", "password"}
    if unsupported:
        raise ValidationFailed(f"unsupported user fields: {sorted(unsupported)}")
    before = _user_doc(user)
    level = int(changes.get("level", user.level))
    home_unit_id = changes.get("home_unit_id", user.home_unit_id)
    actor = txn.users.require(actor_id)
    if actor.id != user.id and max(level, user.level) > actor.level:
        raise PermissionDenied("cannot manage an account above your own level")
    _validate_level_home(txn, level, home_unit_id)
    user = dataclasses.replace(user, level=level, home_unit_id=home_unit_id)
    if "active" in changes:
        user = dataclasses.replace(user, active=bool(changes["active"]))
    if "password" in changes:
        user = dataclasses.replace(
            user, password_digest=security.hash_password(str(changes["password"]))
        )
    txn.put("users", user)
    txn.record(actor_id, "user.edit", "user", user.id, before=before, after=_user_doc(user))
    return user


def _user_doc(user: User) -> dict:
    doc = record_to_doc(user)
    doc.pop("password_digest", None)  # never copy credentials into audit
    return doc


def bootstrap(txn: Txn, university_name: str, admin_username: str,
              admin_password: str) -> tuple[OrgUnit, User]:
    """Create the university root plus the first IT (level 4) account.

    Solves the first-user problem: audit attributes the action to the
    account being created.
    """
    if any(True for _ in txn.org_units) or any(True for _ in txn.users):
        raise InvalidHierarchy("bootstrap requires an empty store")
    root = OrgUnit(id=txn.new_id("org_units"), name=university_name.strip() or "University",
                   kind=UnitKind.UNIVERSITY)
    txn.put("org_units", root)
    admin = User(
        id=txn.new_id("users"),
        username=admin_username,
        password_digest=security.hash_password(admin_password),
        level=4,
        home_unit_id=root.id,
    )
    txn.put("users", admin)
    txn.record(admin.id, "org_unit.create", "org_unit", root.id, after=record_to_doc(root))
    txn.record(admin.id, "user.create", "user", admin.id, after=_user_doc(admin))
    return root, admin
