"""Operator CLI: serve, migrate, seed, and offline workbook import."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backend import Backend, build_backend
from .config import AppConfig, load_config
from .errors import DomainError, E_HAS_CONFLICTS
from .importer import ImportScope, ImportSelection, parse_workbook
from .seed import seed as run_seed
from .storage import Database

SCOPE_ALIASES = {
    "all": ImportScope.ALL,
    "backlog": ImportScope.PRODUCT_BACKLOG,
    "tasks": ImportScope.TASKS,
    "stakeholders": ImportScope.STAKEHOLDERS,
}


def _config(path: str | None) -> AppConfig:
    return load_config(path)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file; WORKDESK_* env vars override.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None):
    ctx.obj = _config(config_path)


@main.command()
@click.pass_obj
def serve(config: AppConfig):
    """Run the HTTP service."""
    import uvicorn

    from .api import create_app

    backend = build_backend(config)
    uvicorn.run(create_app(backend), host=config.listen_host, port=config.listen_port)


@main.command()
@click.pass_obj
def migrate(config: AppConfig):
    """Bring the store schema to head (idempotent)."""
    db = Database(config.storage_url)
    applied = db.migrate()
    for step in applied:
        click.echo(f"applied {step}")
    if not applied:
        click.echo("schema already at head")
    click.echo(f"schema version {db.schema_version()}")


@main.command()
@click.argument("fixture")
@click.option("--force", is_flag=True, help="Wipe and reseed a non-empty store.")
@click.pass_obj
def seed(config: AppConfig, fixture: str, force: bool):
    """Populate the store with a named demo fixture."""
    backend = build_backend(config)
    try:
        ids = run_seed(backend, fixture, force=force)
    except DomainError as exc:
        click.echo(json.dumps({"error": {"code": exc.code, "message": exc.message}}))
        sys.exit(1)
    click.echo(json.dumps(ids, indent=2))


@main.command(name="import")
@click.argument("ws_id")
@click.argument("file_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scope", type=click.Choice(sorted(SCOPE_ALIASES)), default="all")
@click.option("--actor-email", default=None,
              help="Act as this account; defaults to the owning organization's creator.")
@click.pass_obj
def import_workbook(config: AppConfig, ws_id: str, file_path: str, scope: str, actor_email: str | None):
    """Plan and commit a workbook import against a workspace.

    Exit codes: 0 committed, 1 operation error, 2 plan has conflicts.
    """
    backend = build_backend(config)
    try:
        actor = _resolve_actor(backend, ws_id, actor_email)
        model = parse_workbook(Path(file_path).read_bytes())
        plan = backend.importer.plan_import(
            ws_id, model, ImportSelection(SCOPE_ALIASES[scope])
        )
        if plan.conflicts:
            click.echo(
                json.dumps(
                    {
                        "conflicts": [
                            {
                                "kind": c.kind,
                                "entity_id": c.entity_id,
                                "message": c.message,
                                "sources": [list(s) for s in c.sources],
                            }
                            for c in plan.conflicts
                        ]
                    },
                    indent=2,
                )
            )
            sys.exit(2)
        report = backend.importer.commit_import(actor, ws_id, plan)
        payload = report.to_dict()
        if model.warnings:
            payload["warnings"] = [
                {"sheet": w.sheet, "row": w.row, "message": w.message}
                for w in model.warnings
            ]
        click.echo(json.dumps(payload, indent=2))
    except DomainError as exc:
        click.echo(json.dumps({"error": {"code": exc.code, "message": exc.message}}))
        sys.exit(2 if exc.code == E_HAS_CONFLICTS else 1)


def _resolve_actor(backend: Backend, ws_id: str, actor_email: str | None) -> str:
    if actor_email is not None:
        account = backend.identity.find_by_email(actor_email)
        if account is None:
            raise DomainError("E-UNKNOWN-USER", f"no account {actor_email}")
        return account.user_id
    ws = backend.tenancy.get_workspace(ws_id)
    org = backend.tenancy.get_organization(ws.org_id)
    return org.created_by


if __name__ == "__main__":  # pragma: no cover
    main()
