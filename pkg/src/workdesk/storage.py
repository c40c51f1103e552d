"""Relational storage gateway.

One :class:`Database` wraps a SQLAlchemy engine (SQLite by default, any
transactional engine by URL), owns the schema and the migration runner, and
hands out transactions. Uniqueness rules (emails, memberships, pending
invitations, task ids, one active sprint) live in the schema as unique
indexes so they hold under concurrent writers regardless of engine.

Embedded engines get a process-wide lock around transactions: SQLite is a
single-writer store and the services compose nested operations inside one
outer transaction (re-entrant via a thread-local connection).
"""

from __future__ import annotations

import hashlib
import json
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Iterator

from sqlalchemy import (
    Boolean,
    Column,
    Float,
    Index,
    Integer,
    LargeBinary,
    MetaData,
    Table,
    Text,
    create_engine,
    insert,
    select,
    text,
    update,
)
from sqlalchemy.engine import Connection, Engine
from sqlalchemy.pool import StaticPool

metadata = MetaData()

id_counters = Table(
    "id_counters",
    metadata,
    Column("prefix", Text, primary_key=True),
    Column("next_value", Integer, nullable=False),
)

users = Table(
    "users",
    metadata,
    Column("id", Text, primary_key=True),
    Column("email", Text, nullable=False, unique=True),
    Column("display_name", Text, nullable=False),
    Column("credential_hash", Text, nullable=False),
    Column("created_at", Text, nullable=False),
)

sessions = Table(
    "sessions",
    metadata,
    Column("token", Text, primary_key=True),
    Column("user_id", Text, nullable=False),
    Column("expires_at", Text, nullable=False),
)

orgs = Table(
    "orgs",
    metadata,
    Column("id", Text, primary_key=True),
    Column("name", Text, nullable=False),
    Column("activity_type", Text, nullable=False, default=""),
    Column("country", Text, nullable=False, default=""),
    Column("created_by", Text, nullable=False),
    Column("created_at", Text, nullable=False),
)

workspaces = Table(
    "workspaces",
    metadata,
    Column("id", Text, primary_key=True),
    Column("org_id", Text, nullable=False, index=True),
    Column("name", Text, nullable=False),
    Column("process", Text, nullable=False),
    Column("status", Text, nullable=False),
    Column("benefits", Text, nullable=False, default=""),
    Column("success_criteria", Text, nullable=False, default=""),
    Column("planned_cost", Float, nullable=False),
    Column("current_cost", Float, nullable=False),
    Column("planned_start", Text, nullable=False),
    Column("planned_end", Text, nullable=False),
    Column("board_version", Integer, nullable=False, default=0),
    Column("created_at", Text, nullable=False),
)

memberships = Table(
    "memberships",
    metadata,
    Column("user_id", Text, nullable=False),
    Column("scope_kind", Text, nullable=False),  # platform | org | ws
    Column("scope_id", Text, nullable=False),
    Column("role", Text, nullable=False),
    Index("ix_membership_scope", "scope_kind", "scope_id"),
    Index("ux_membership", "user_id", "scope_kind", "scope_id", unique=True),
)

invitations = Table(
    "invitations",
    metadata,
    Column("id", Text, primary_key=True),
    Column("token", Text, nullable=False, unique=True),
    Column("inviter", Text, nullable=False),
    Column("invitee_email", Text, nullable=False),
    Column("scope_kind", Text, nullable=False),
    Column("scope_id", Text, nullable=False),
    Column("offered_role", Text, nullable=False),
    Column("state", Text, nullable=False),
    Column("created_at", Text, nullable=False),
    Index(
        "ux_pending_invite",
        "invitee_email",
        "scope_kind",
        "scope_id",
        unique=True,
        sqlite_where=text("state = 'Pending'"),
        postgresql_where=text("state = 'Pending'"),
    ),
)

files = Table(
    "files",
    metadata,
    Column("id", Text, primary_key=True),
    Column("scope_kind", Text, nullable=False),
    Column("scope_id", Text, nullable=False),
    Column("name", Text, nullable=False),
)

file_versions = Table(
    "file_versions",
    metadata,
    Column("file_id", Text, nullable=False),
    Column("version_no", Integer, nullable=False),
    Column("content", LargeBinary, nullable=False),
    Column("uploaded_by", Text, nullable=False),
    Column("uploaded_at", Text, nullable=False),
    Index("ux_file_version", "file_id", "version_no", unique=True),
)

events = Table(
    "events",
    metadata,
    Column("id", Text, primary_key=True),
    Column("kind", Text, nullable=False),
    Column("payload", Text, nullable=False),
    Column("occurred_at", Text, nullable=False),
)

stakeholders = Table(
    "stakeholders",
    metadata,
    Column("ws_id", Text, nullable=False),
    Column("stakeholder_id", Text, nullable=False),
    Column("name", Text, nullable=False, default=""),
    Column("email", Text, nullable=False, default=""),
    Column("role", Text, nullable=False, default=""),
    Index("ux_stakeholder", "ws_id", "stakeholder_id", unique=True),
)

backlog_items = Table(
    "backlog_items",
    metadata,
    Column("ws_id", Text, nullable=False),
    Column("item_id", Text, nullable=False),
    Column("name", Text, nullable=False),
    Column("description", Text, nullable=True),
    Column("item_type", Text, nullable=False),
    Column("priority", Text, nullable=False),
    Column("status", Text, nullable=False),
    Column("effort_estimate", Float, nullable=False, default=0.0),
    Index("ux_backlog_item", "ws_id", "item_id", unique=True),
)

sprints = Table(
    "sprints",
    metadata,
    Column("id", Text, primary_key=True),
    Column("ws_id", Text, nullable=False, index=True),
    Column("name", Text, nullable=False),
    Column("start_date", Text, nullable=False),
    Column("end_date", Text, nullable=False),
    Column("stakeholder_ids", Text, nullable=False, default="[]"),
    Column("state", Text, nullable=False),
    Column("seq", Integer, nullable=False),
    Index(
        "ux_one_active_sprint",
        "ws_id",
        unique=True,
        sqlite_where=text("state = 'Active'"),
        postgresql_where=text("state = 'Active'"),
    ),
)

tasks = Table(
    "tasks",
    metadata,
    Column("gid", Text, nullable=False, unique=True),  # platform-wide handle for routes
    Column("ws_id", Text, nullable=False, index=True),
    Column("task_id", Text, nullable=False),
    Column("sprint_id", Text, nullable=True),  # NULL = kanban board
    Column("name", Text, nullable=False),
    Column("description", Text, nullable=True),
    Column("task_type", Text, nullable=False),
    Column("priority", Text, nullable=False),
    Column("assignees", Text, nullable=False, default="[]"),
    Column("planned_effort", Float, nullable=False, default=0.0),
    Column("status", Text, nullable=False),
    Column("source_item_id", Text, nullable=True),
    Column("completed_at", Text, nullable=True),
    Index("ux_task", "ws_id", "task_id", unique=True),
)

effort_entries = Table(
    "effort_entries",
    metadata,
    Column("ws_id", Text, nullable=False),
    Column("task_id", Text, nullable=False),
    Column("day", Integer, nullable=False),
    Column("remaining", Float, nullable=True),
    Column("actual", Float, nullable=True),
    Index("ux_effort_entry", "ws_id", "task_id", "day", unique=True),
)

notifications = Table(
    "notifications",
    metadata,
    Column("id", Text, primary_key=True),
    Column("seq", Integer, nullable=False),
    Column("recipient", Text, nullable=False, index=True),
    Column("kind", Text, nullable=False),
    Column("payload", Text, nullable=False),
    Column("read", Boolean, nullable=False, default=False),
    Column("created_at", Text, nullable=False),
    Column("dedup_key", Text, nullable=True, unique=True),
)

outbox_emails = Table(
    "outbox_emails",
    metadata,
    Column("id", Text, primary_key=True),
    Column("to_email", Text, nullable=False),
    Column("subject", Text, nullable=False),
    Column("body", Text, nullable=False),
    Column("created_at", Text, nullable=False),
)

templates = Table(
    "templates",
    metadata,
    Column("id", Text, primary_key=True),
    Column("scope_kind", Text, nullable=False),
    Column("name", Text, nullable=False),
    Column("body", Text, nullable=False),
    Index("ux_template_name", "scope_kind", "name", unique=True),
)

schema_migrations = Table(
    "schema_migrations",
    metadata,
    Column("version", Integer, primary_key=True),
    Column("name", Text, nullable=False),
    Column("applied_at", Text, nullable=False),
)


def _initial_schema(engine: Engine) -> None:
    metadata.create_all(engine)


#: Ordered migration steps. Append-only; never reorder or edit a shipped step.
MIGRATIONS: list[tuple[int, str, Callable[[Engine], None]]] = [
    (1, "initial schema", _initial_schema),
]


class MigrationError(Exception):
    pass


@dataclass
class _TxState:
    conn: Connection
    after_commit: list[Callable[[], None]] = field(default_factory=list)


class Database:
    """Engine wrapper handing out serialized, re-entrant transactions."""

    def __init__(self, url: str = "sqlite://"):
        self.url = url
        if url.startswith("sqlite"):
            # One shared connection: in-memory databases vanish per-connection,
            # and SQLite is single-writer anyway. The RLock serializes writers.
            self.engine = create_engine(
                url,
                poolclass=StaticPool,
                connect_args={"check_same_thread": False},
            )
        else:
            self.engine = create_engine(url)
        self._lock = threading.RLock()
        self._tls = threading.local()

    # -- transactions ---------------------------------------------------

    @contextmanager
    def transaction(self) -> Iterator[Connection]:
        """Open a transaction, or join the one already open on this thread."""
        existing = getattr(self._tls, "tx", None)
        if existing is not None:
            yield existing.conn
            return
        with self._lock:
            with self.engine.begin() as conn:
                state = _TxState(conn)
                self._tls.tx = state
                try:
                    yield conn
                finally:
                    self._tls.tx = None
            # Commit succeeded if we got here without an exception.
            for hook in state.after_commit:
                hook()

    def after_commit(self, hook: Callable[[], None]) -> None:
        """Run ``hook`` after the current outermost transaction commits."""
        state = getattr(self._tls, "tx", None)
        if state is None:
            hook()
        else:
            state.after_commit.append(hook)

    # -- id allocation ---------------------------------------------------

    def new_id(self, conn: Connection, prefix: str) -> str:
        """Allocate the next id for ``prefix`` ("org-1", "org-2", ...)."""
        row = conn.execute(
            select(id_counters.c.next_value).where(id_counters.c.prefix == prefix)
        ).first()
        if row is None:
            conn.execute(insert(id_counters).values(prefix=prefix, next_value=2))
            n = 1
        else:
            n = row.next_value
            conn.execute(
                update(id_counters)
                .where(id_counters.c.prefix == prefix)
                .values(next_value=n + 1)
            )
        return f"{prefix}-{n}"

    # -- migrations -------------------------------------------------------

    def migrate(self) -> list[str]:
        """Apply pending migrations in order; refuse to run behind the store."""
        applied: list[str] = []
        with self.transaction() as conn:
            schema_migrations.create(self.engine, checkfirst=True)
            rows = conn.execute(
                select(schema_migrations.c.version).order_by(schema_migrations.c.version)
            ).all()
            current = rows[-1].version if rows else 0
            latest = MIGRATIONS[-1][0]
            if current > latest:
                raise MigrationError(
                    f"store is at schema version {current}, this build knows only {latest}; "
                    "downgrade refused"
                )
            for version, name, step in MIGRATIONS:
                if version <= current:
                    continue
                step(self.engine)
                conn.execute(
                    insert(schema_migrations).values(
                        version=version,
                        name=name,
                        applied_at=datetime.now(timezone.utc).isoformat(),
                    )
                )
                applied.append(f"{version}: {name}")
        return applied

    def schema_version(self) -> int:
        with self.transaction() as conn:
            schema_migrations.create(self.engine, checkfirst=True)
            rows = conn.execute(select(schema_migrations.c.version)).all()
            return max((r.version for r in rows), default=0)

    def schema_hash(self) -> str:
        """Stable digest of the live schema (tables, columns, indexes)."""
        from sqlalchemy import inspect

        insp = inspect(self.engine)
        desc: dict[str, Any] = {}
        for table in sorted(insp.get_table_names()):
            desc[table] = {
                "columns": [
                    {"name": c["name"], "type": str(c["type"]), "nullable": c["nullable"]}
                    for c in insp.get_columns(table)
                ],
                "indexes": sorted(
                    (
                        {
                            "name": i["name"],
                            "cols": [c for c in i["column_names"] if c],
                            "unique": bool(i["unique"]),
                        }
                        for i in insp.get_indexes(table)
                    ),
                    key=lambda i: str(i["name"]),
                ),
            }
        return _digest(desc)

    def is_empty(self) -> bool:
        with self.transaction() as conn:
            for table in (users, orgs, workspaces):
                if conn.execute(select(table).limit(1)).first() is not None:
                    return False
        return True


def _digest(payload: Any) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def workspace_state_hash(conn: Connection, ws_id: str) -> str:
    """Canonical digest of everything an import may read or write in a workspace.

    Covers the workspace row plus stakeholders, backlog items, sprints, tasks,
    and effort entries, in deterministic key order. Notifications, events, and
    files are deliberately outside the import surface.
    """
    ws = conn.execute(select(workspaces).where(workspaces.c.id == ws_id)).first()
    snapshot: dict[str, Any] = {
        "workspace": dict(ws._mapping) if ws is not None else None,
        "stakeholders": _sorted_rows(conn, stakeholders, ws_id, ("stakeholder_id",)),
        "backlog_items": _sorted_rows(conn, backlog_items, ws_id, ("item_id",)),
        "sprints": _sorted_rows(conn, sprints, ws_id, ("id",)),
        "tasks": _sorted_rows(conn, tasks, ws_id, ("task_id",)),
        "effort": _sorted_rows(conn, effort_entries, ws_id, ("task_id", "day")),
    }
    return _digest(snapshot)


def _sorted_rows(conn: Connection, table: Table, ws_id: str, order: tuple[str, ...]) -> list[dict]:
    rows = [dict(r._mapping) for r in conn.execute(select(table).where(table.c.ws_id == ws_id))]
    rows.sort(key=lambda r: tuple(str(r[k]) for k in order))
    return rows
