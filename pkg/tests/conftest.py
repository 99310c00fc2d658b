"""Shared fixtures: a deterministic campus store and independent oracles.

The oracles re-encode the permission rules from scratch (literal level
tables, parent-chain walks) so they share no code path with the modules
they check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import pytest

import uuis.security
from uuis import inventory, orgs
from uuis.model import (
    Asset,
    AssetKind,
    AssetTypeDef,
    Location,
    OrgUnit,
    UnitKind,
    User,
)
from uuis.storage import Store


@pytest.fixture(autouse=True)
def fast_password_hashing(monkeypatch):
    # Digests stay self-describing, so cheap test digests still verify.
    monkeypatch.setattr(uuis.security, "PBKDF2_ITERATIONS", 100)


class TickingClock:
    """Deterministic clock: every reading is one second after the last."""

    def __init__(self, start: datetime | None = None):
        self.now = start or datetime(2026, 1, 1, tzinfo=timezone.utc)

    def __call__(self) -> datetime:
        self.now += timedelta(seconds=1)
        return self.now


@dataclass
class Campus:
    """One university, two faculties, four departments, ten users."""

    store: Store
    units: dict[str, OrgUnit] = field(default_factory=dict)
    users: dict[str, User] = field(default_factory=dict)
    types: dict[str, AssetTypeDef] = field(default_factory=dict)
    locations: dict[str, Location] = field(default_factory=dict)
    assets: dict[str, Asset] = field(default_factory=dict)

    def unit(self, key: str) -> OrgUnit:
        return self.units[key]

    def user(self, key: str) -> User:
        return self.users[key]

    @property
    def tree_unit_ids(self) -> list[str]:
        return [self.units[k].id for k in ("root", "f1", "f2", "d1", "d2", "d3", "d4")]

    @property
    def user_ids(self) -> list[str]:
        return [u.id for u in self.users.values()]

    def view(self):
        return self.store.view()


def build_campus(with_external: bool = True) -> Campus:
    store = Store(clock=TickingClock())
    campus = Campus(store=store)

    def setup(txn):
        root, it = orgs.bootstrap(txn, "University", "it", "it-pass")
        campus.units["root"] = root
        campus.users["it"] = it
        for key, name, kind, parent in (
            ("f1", "Faculty of Science", UnitKind.FACULTY, root.id),
            ("f2", "Faculty of Arts", UnitKind.FACULTY, root.id),
        ):
            campus.units[key] = orgs.create_org_unit(txn, it.id, name, kind, parent)
        for key, name, parent in (
            ("d1", "Chemistry", campus.units["f1"].id),
            ("d2", "Physics", campus.units["f1"].id),
            ("d3", "History", campus.units["f2"].id),
            ("d4", "Philosophy", campus.units["f2"].id),
        ):
            campus.units[key] = orgs.create_org_unit(
                txn, it.id, name, UnitKind.DEPARTMENT, parent)
        if with_external:
            campus.units["ext"] = orgs.create_org_unit(
                txn, it.id, "Acme Surplus", UnitKind.EXTERNAL, None)

        for key, level, unit_key in (
            ("uadm", 3, "root"),
            ("fa1", 2, "f1"),
            ("fa2", 2, "f2"),
            ("da1", 1, "d1"),
            ("da2", 1, "d2"),
            ("da3", 1, "d3"),
            ("stu1", 0, "d1"),
            ("stu2", 0, "d2"),
            ("helper", 0, "d1"),
        ):
            campus.users[key] = orgs.create_user(
                txn, it.id, key, f"{key}-pass", level, campus.units[unit_key].id)

        campus.types["laptop"] = inventory.define_asset_type(
            txn, it.id, "laptop", AssetKind.OTHER, ["make", "ram"])
        campus.types["projector"] = inventory.define_asset_type(
            txn, it.id, "projector", AssetKind.OTHER, ["lumens"])
        campus.types["lecture-hall"] = inventory.define_asset_type(
            txn, it.id, "lecture-hall", AssetKind.SPACE, ["seats"])

        for key, building, floor, room, unit_key in (
            ("h801", "H", "8", "801", "d1"),
            ("h802", "H", "8", "802", "d1"),
            ("h803", "H", "8", "803", "d2"),
            ("b101", "B", "1", "101", "d3"),
            ("b102", "B", "1", "102", "d4"),
        ):
            campus.locations[key] = inventory.create_location(
                txn, it.id, building, floor, room, campus.units[unit_key].id)
        if with_external:
            campus.locations["dock"] = inventory.create_location(
                txn, it.id, "Offsite", "0", "Dock", campus.units["ext"].id)

        for key, serial, type_name, unit_key, loc_key, props in (
            ("dell1", "SN-DELL-1", "laptop", "d1", "h801", {"make": "Dell", "ram": "8GB"}),
            ("dell2", "SN-DELL-2", "laptop", "d1", "h802", {"make": "Dell", "ram": "4GB"}),
            ("prj", "SN-PRJ-1", "projector", "d2", "h803", {"lumens": "3000"}),
            ("mac", "SN-MAC-1", "laptop", "d3", "b101", {"make": "Apple", "ram": "16GB"}),
        ):
            campus.assets[key] = inventory.add_asset(
                txn, campus.users["it"].id, serial, type_name,
                campus.units[unit_key].id, campus.locations[loc_key].id, props)

    store.transact(setup)
    return campus


@pytest.fixture
def campus() -> Campus:
    return build_campus()


# --- independent oracles -----------------------------------------------------

#: Literal level defaults, re-encoded from the predefined-permissions rules
#: rather than imported from the implementation.
_ADMIN = {
    "request:create", "request:list", "request:show", "request:edit", "request:approve",
    "asset:create", "asset:list", "asset:show", "asset:edit",
    "location:create", "location:list", "location:show", "location:edit", "location:delete",
    "search:simple", "search:advanced",
    "report:list", "report:show",
    "user:list", "user:show",
}

ALL_ACTION_STRINGS = sorted(_ADMIN | {
    "universityPart:create", "universityPart:list", "universityPart:show",
    "universityPart:edit", "universityPart:delete",
    "user:edit", "audit:list", "audit:show",
})

ORACLE_LEVEL_DEFAULTS: dict[int, frozenset[str]] = {
    0: frozenset({"request:create"}),
    1: frozenset(_ADMIN),
    2: frozenset(_ADMIN),
    3: frozenset(_ADMIN | {
        "universityPart:create", "universityPart:list", "universityPart:show",
        "universityPart:edit", "universityPart:delete", "user:edit",
    }),
    4: frozenset(ALL_ACTION_STRINGS),
}

assert len(ALL_ACTION_STRINGS) == 28


def oracle_ancestors(db, unit_id: str) -> list[str]:
    """Parent-chain enumeration, including the unit itself."""
    chain = []
    unit = db.org_units.require(unit_id)
    while unit is not None:
        chain.append(unit.id)
        unit = db.org_units.get(unit.parent_id) if unit.parent_id else None
    return chain


def oracle_effective(db, user_id: str) -> set[tuple[str, str]]:
    """(action, scope-unit) pairs: literal level table plus live grants."""
    user = db.users.require(user_id)
    if not user.active:
        return set()
    if user.level == 4:
        root = next(u for u in db.org_units if u.kind.value == "university")
        scope = root.id
    else:
        scope = user.home_unit_id
    pairs = {(action, scope) for action in ORACLE_LEVEL_DEFAULTS[user.level]}
    for grant in db.grants:
        if grant.grantee_id == user_id and grant.revoked_at is None:
            pairs.update((p.action.value, p.scope_unit_id) for p in grant.permissions)
    return pairs


def oracle_check(db, user_id: str, action: str, target_unit_id: str) -> bool:
    """Brute force: any ancestor of the target literally paired with the action."""
    held = oracle_effective(db, user_id)
    return any((action, ancestor) in held
               for ancestor in oracle_ancestors(db, target_unit_id))


# --- slow-store instrumentation for deadline tests ---------------------------


class SlowTable:
    def __init__(self, table, delay: float):
        self._table = table
        self._delay = delay

    def __iter__(self):
        import time

        for record in self._table:
            time.sleep(self._delay)
            yield record

    def __getattr__(self, name):
        return getattr(self._table, name)


class SlowView:
    """View proxy that makes every asset row take ``delay`` seconds."""

    def __init__(self, view, delay: float):
        self._view = view
        self.assets = SlowTable(view.assets, delay)

    def __getattr__(self, name):
        return getattr(self._view, name)


class SlowStore:
    """Store proxy whose views scan assets slowly."""

    def __init__(self, store: Store, delay: float):
        self._store = store
        self._delay = delay

    def view(self):
        return SlowView(self._store.view(), self._delay)

    def __getattr__(self, name):
        return getattr(self._store, name)
