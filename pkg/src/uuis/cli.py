"""Local operator tool: serve, init/seed, users, grants, import, backup.

Runs against the store file directly — no HTTP session — which is exactly
the IT-only local access path. Exit codes: 0 success, 1 validation or
domain error, 2 I/O error.
"""

from __future__ import annotations

import functools
import os
import sys
from pathlib import Path

import click
from filelock import FileLock

from . import audit as audit_ops
from . import authz, inventory, orgs, reports
from .errors import IoFailure, NotFound, UuisError, ValidationFailed
from .model import ReportKind, ScopedPermission, parse_action
from .reports import ReportSpec
from .storage import Store


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except IoFailure as exc:
            click.echo(f"error: {exc.detail}", err=True)
            sys.exit(2)
        except UuisError as exc:
            click.echo(f"error: {exc.detail}", err=True)
            if isinstance(exc, ValidationFailed) and exc.rows:
                for row in exc.rows:
                    click.echo(f"  row {row['row']} [{row['column']}]: {row['reason']}",
                               err=True)
            sys.exit(1)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


@click.group()
@click.option("--store", "store_path", envvar="UUIS_STORE_PATH", default=None,
              help="Path of the store file (or set UUIS_STORE_PATH).")
@click.pass_context
def main(ctx, store_path):
    """Unified University Inventory System operator tool."""
    ctx.obj = store_path


def _store_path(ctx) -> Path:
    if not ctx.obj:
        click.echo("error: no store path; pass --store or set UUIS_STORE_PATH", err=True)
        sys.exit(1)
    return Path(ctx.obj)


def _open_store(ctx) -> Store:
    return Store(_store_path(ctx))


def _lock(path: Path) -> FileLock:
    return FileLock(str(path) + ".lock")


def _resolve_actor(db, username: str | None):
    if username:
        user = orgs.find_user_by_username(db, username)
        if user is None:
            raise NotFound(f"no user named {username!r}")
        return user
    candidates = sorted((u for u in db.users if u.level == 4 and u.active),
                        key=lambda u: u.id)
    if not candidates:
        raise ValidationFailed("no active level-4 user; run init or pass --actor")
    return candidates[0]


def _resolve_unit(db, token: str):
    unit = db.org_units.get(token)
    if unit is not None:
        return unit
    matches = [u for u in db.org_units if u.name == token]
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise ValidationFailed(f"unit name {token!r} is ambiguous; use its id")
    raise NotFound(f"no unit {token!r}")


def _parse_permission(db, token: str) -> ScopedPermission:
    action, sep, unit_token = token.partition("@")
    if not sep:
        raise ValidationFailed(f"expected action@unit, got {token!r}")
    return ScopedPermission(parse_action(action), _resolve_unit(db, unit_token).id)


@main.command()
@click.option("--addr", envvar="UUIS_HTTP_ADDR", default="127.0.0.1:8000",
              help="host:port to bind (or set UUIS_HTTP_ADDR).")
@click.pass_context
@_handled
def serve(ctx, addr):
    """Run the HTTP API server."""
    import uvicorn

    from .server import ServerConfig, create_app

    store = _open_store(ctx)
    app = create_app(store, ServerConfig.from_env())
    host, _, port = addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")


@main.command()
@click.option("--admin-user", required=True)
@click.option("--admin-pass", required=True)
@click.option("--university", default="University", help="Name of the root unit.")
@click.option("--force", is_flag=True, help="Reinitialize a non-empty store.")
@click.pass_context
@_handled
def init(ctx, admin_user, admin_pass, university, force):
    """Create the university root and the first level-4 user."""
    path = _store_path(ctx)
    with _lock(path):
        if path.exists() and not Store(path).is_empty():
            if not force:
                click.echo("error: store is not empty (use --force to reinitialize)",
                           err=True)
                sys.exit(1)
            path.unlink()
        store = Store(path)
        root, admin = store.transact(
            lambda txn: orgs.bootstrap(txn, university, admin_user, admin_pass))
    click.echo(f"initialized: root={root.id} admin={admin.id}")


@main.group()
def user():
    """Manage user accounts."""


@user.command("add")
@click.argument("username")
@click.option("--password", required=True)
@click.option("--level", type=click.IntRange(0, 4), required=True)
@click.option("--unit", required=True, help="Home unit id or name.")
@click.option("--actor", default=None, help="Acting username (default: first IT user).")
@click.pass_context
@_handled
def user_add(ctx, username, password, level, unit, actor):
    store = _open_store(ctx)

    def work(txn):
        acting = _resolve_actor(txn, actor)
        home = _resolve_unit(txn, unit)
        return orgs.create_user(txn, acting.id, username, password, level, home.id)

    created = store.transact(work)
    click.echo(f"created user {created.username} ({created.id}) level {created.level}")


@user.command("deactivate")
@click.argument("username")
@click.option("--actor", default=None)
@click.pass_context
@_handled
def user_deactivate(ctx, username, actor):
    store = _open_store(ctx)

    def work(txn):
        acting = _resolve_actor(txn, actor)
        target = orgs.find_user_by_username(txn, username)
        if target is None:
            raise NotFound(f"no user named {username!r}")
        return orgs.edit_user(txn, acting.id, target.id, {"active": False})

    updated = store.transact(work)
    click.echo(f"deactivated {updated.username}")


@user.command("set-level")
@click.argument("username")
@click.argument("level", type=click.IntRange(0, 4))
@click.option("--unit", default=None, help="New home unit if the level needs one.")
@click.option("--actor", default=None)
@click.pass_context
@_handled
def user_set_level(ctx, username, level, unit, actor):
    store = _open_store(ctx)

    def work(txn):
        acting = _resolve_actor(txn, actor)
        target = orgs.find_user_by_username(txn, username)
        if target is None:
            raise NotFound(f"no user named {username!r}")
        changes = {"level": level}
        if unit:
            changes["home_unit_id"] = _resolve_unit(txn, unit).id
        return orgs.edit_user(txn, acting.id, target.id, changes)

    updated = store.transact(work)
    click.echo(f"{updated.username} is now level {updated.level}")


@main.group()
def grant():
    """Delegate or revoke scoped permissions."""


@grant.command("add")
@click.argument("grantee")
@click.argument("permissions", nargs=-1, required=True)
@click.option("--grantor", default=None, help="Granting username (default: first IT user).")
@click.pass_context
@_handled
def grant_add(ctx, grantee, permissions, grantor):
    """Delegate PERMISSIONS (action@unit ...) to GRANTEE."""
    store = _open_store(ctx)

    def work(txn):
        granting = _resolve_actor(txn, grantor)
        target = orgs.find_user_by_username(txn, grantee)
        if target is None:
            raise NotFound(f"no user named {grantee!r}")
        parsed = {_parse_permission(txn, token) for token in permissions}
        return authz.delegate(txn, granting.id, target.id, parsed)

    created = store.transact(work)
    click.echo(f"grant {created.id}: {len(created.permissions)} permission(s) "
               f"to {grantee}")


@grant.command("revoke")
@click.argument("grant_id")
@click.option("--actor", default=None)
@click.pass_context
@_handled
def grant_revoke(ctx, grant_id, actor):
    store = _open_store(ctx)

    def work(txn):
        acting = _resolve_actor(txn, actor)
        return authz.revoke(txn, acting.id, grant_id)

    revoked = store.transact(work)
    click.echo(f"grant {revoked.id} revoked")


@main.command("import")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--actor", default=None)
@click.pass_context
@_handled
def import_csv(ctx, csv_path, actor):
    """Bulk-import assets from a CSV file (all-or-nothing)."""
    path = _store_path(ctx)
    data = csv_path.read_bytes()
    with _lock(path):
        store = Store(path)

        def work(txn):
            acting = _resolve_actor(txn, actor)
            return inventory.bulk_import(txn, acting.id, data)

        result = store.transact(work)
    click.echo(f"imported: {result['created']} created, {result['updated']} updated")


@main.command()
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
@_handled
def backup(ctx, path):
    """Write a canonical snapshot of the store to PATH."""
    store = _open_store(ctx)
    summary = store.backup(path)
    click.echo(f"backup written: {summary['path']} ({summary['bytes']} bytes)")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--force", is_flag=True, help="Overwrite a non-empty store.")
@click.pass_context
@_handled
def restore(ctx, path, force):
    """Replace the store contents with the snapshot at PATH."""
    store_file = _store_path(ctx)
    with _lock(store_file):
        store = Store(store_file)
        store.restore(path, force=force)
    click.echo(f"restored from {path}")


@main.command()
@click.argument("kind", type=click.Choice([k.value for k in ReportKind]))
@click.option("--filter", "filters", multiple=True, help="column=value (repeatable).")
@click.option("--sort", "sort_field", default=None)
@click.option("--desc", is_flag=True, help="Sort descending.")
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV instead of columns.")
@click.option("--actor", default=None)
@click.pass_context
@_handled
def report(ctx, kind, filters, sort_field, desc, as_csv, actor):
    """Run one of the three reports against the store."""
    store = _open_store(ctx)
    db = store.view()
    acting = _resolve_actor(db, actor)
    parsed = {}
    for token in filters:
        key, sep, value = token.partition("=")
        if not sep:
            raise ValidationFailed(f"expected column=value, got {token!r}")
        parsed[key] = value
    spec = ReportSpec(kind=ReportKind(kind), filters=parsed,
                      sort=(sort_field, not desc) if sort_field else None)
    table = reports.report(db, acting.id, spec)
    if as_csv:
        click.echo(reports.render_csv(table["columns"], table["rows"]), nl=False)
        return
    click.echo("\t".join(table["columns"]))
    for row in table["rows"]:
        click.echo("\t".join(str(row.get(c, "")) for c in table["columns"]))


@main.command("drain-outbox")
@click.argument("outbox_path", type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
@_handled
def drain_outbox(ctx, outbox_path):
    """Deliver queued notifications to a local outbox file."""
    store = _open_store(ctx)
    count = audit_ops.drain_outbox(store, audit_ops.FileTransport(outbox_path))
    click.echo(f"delivered {count} notification(s)")


if __name__ == "__main__":
    main()
