"""Report automation: stored text templates rendered by tag replacement.

Grammar (docs/report-tags.md): scalar tags are ``{{path.to.field}}``, table
tags are ``{{table:name}}``. The catalog per scope kind is closed; templates
are validated at registration so rendering a registered template can never
hit an unknown tag. Output is plain text with Markdown-style tables, UTF-8,
LF line endings, and never contains a brace pair.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from sqlalchemy import delete, insert, select

from . import storage
from .authz import Role, Scope, require
from .errors import (
    DomainError,
    E_FORBIDDEN,
    E_NO_SUCH_ORG,
    E_NO_SUCH_TEMPLATE,
    E_NO_SUCH_WS,
    E_SCOPE_MISMATCH,
    E_TAG_SYNTAX,
    E_TAG_UNKNOWN,
)
from .tenancy import TenancyService

TAG_RE = re.compile(r"\{\{([^{}]*)\}\}")
SCALAR_RE = re.compile(r"^[a-z_]+(\.[a-z_]+)+$")
TABLE_RE = re.compile(r"^table:([a-z_]+)$")

ORG_SCOPE = "Organization"
WS_SCOPE = "Workspace"


@dataclass(frozen=True)
class DocumentTemplate:
    template_id: str
    scope_kind: str
    name: str
    body: str


@dataclass(frozen=True)
class TagCatalog:
    scope_kind: str
    scalars: dict[str, str]  # path -> description
    tables: dict[str, tuple[str, ...]]  # name -> columns

    def to_dict(self) -> dict:
        return {
            "scope_kind": self.scope_kind,
            "scalars": dict(self.scalars),
            "tables": {name: list(cols) for name, cols in self.tables.items()},
        }


ORG_SCALARS = {
    "organization.name": "organization name",
    "organization.activity_type": "organization activity type",
    "organization.country": "organization country",
    "organization.workspace_count": "number of workspaces",
    "organization.member_count": "distinct users across the organization",
}

WS_SCALARS = {
    "workspace.name": "workspace name",
    "workspace.process": "management process (Scrum or Kanban)",
    "workspace.status": "workspace status",
    "workspace.benefits": "expected benefits",
    "workspace.success_criteria": "success criteria",
    "workspace.planned_cost": "planned cost, two decimals",
    "workspace.current_cost": "current cost, two decimals",
    "workspace.planned_start": "planned start date, ISO",
    "workspace.planned_end": "planned end date, ISO",
    "organization.name": "owning organization name",
    "organization.activity_type": "owning organization activity type",
    "organization.country": "owning organization country",
}

WS_TABLES = {
    "stakeholders": ("ID", "Name", "Email", "Role"),
    "product_backlog": ("ID", "Name", "Type", "Priority", "Status", "Effort"),
    "sprints": ("Name", "Start", "End", "State"),
    "tasks": ("ID", "Sprint", "Name", "Type", "Priority", "Status", "PlannedEffort"),
}

CATALOGS = {
    ORG_SCOPE: TagCatalog(ORG_SCOPE, ORG_SCALARS, {}),
    WS_SCOPE: TagCatalog(WS_SCOPE, WS_SCALARS, WS_TABLES),
}


def tag_catalog(scope_kind: str) -> TagCatalog:
    if scope_kind not in CATALOGS:
        raise DomainError(E_SCOPE_MISMATCH, f"unknown template scope {scope_kind!r}")
    return CATALOGS[scope_kind]


def validate_body(scope_kind: str, body: str) -> list[str]:
    """Return the tags used, raising on syntax errors or unknown tags."""
    catalog = tag_catalog(scope_kind)
    tags = []
    remainder = TAG_RE.sub("", body)
    if "{{" in remainder or "}}" in remainder:
        offset = max(remainder.find("{{"), remainder.find("}}"))
        raise DomainError(E_TAG_SYNTAX, f"unbalanced braces near offset {offset}")
    for match in TAG_RE.finditer(body):
        inner = match.group(1).strip()
        if TABLE_RE.match(inner):
            table = TABLE_RE.match(inner).group(1)
            if table not in catalog.tables:
                raise DomainError(
                    E_TAG_UNKNOWN,
                    f"unknown table tag {inner!r} at offset {match.start()}",
                )
        elif SCALAR_RE.match(inner):
            if inner not in catalog.scalars:
                raise DomainError(
                    E_TAG_UNKNOWN,
                    f"unknown tag {inner!r} at offset {match.start()}",
                )
        else:
            raise DomainError(
                E_TAG_SYNTAX, f"malformed tag {inner!r} at offset {match.start()}"
            )
        tags.append(inner)
    return tags


def format_money(value: float) -> str:
    return f"{float(value):.2f}"


def format_hours(value: float) -> str:
    number = float(value)
    return str(int(number)) if number.is_integer() else str(number)


def _clean(value) -> str:
    """Render a scalar; never let data re-introduce tag delimiters."""
    text = "" if value is None else str(value)
    return text.replace("{{", "{ {").replace("}}", "} }")


class ReportService:
    def __init__(self, db: storage.Database, tenancy: TenancyService):
        self.db = db
        self.tenancy = tenancy

    def register_template(
        self, actor: str, scope_kind: str, name: str, body: str
    ) -> DocumentTemplate:
        validate_body(scope_kind, body)
        with self.db.transaction() as conn:
            self._require_contributor(conn, actor)
            existing = conn.execute(
                select(storage.templates).where(
                    storage.templates.c.scope_kind == scope_kind,
                    storage.templates.c.name == name,
                )
            ).first()
            if existing is not None:
                conn.execute(
                    delete(storage.templates).where(storage.templates.c.id == existing.id)
                )
            template_id = self.db.new_id(conn, "tpl")
            conn.execute(
                insert(storage.templates).values(
                    id=template_id, scope_kind=scope_kind, name=name, body=body
                )
            )
            return DocumentTemplate(template_id, scope_kind, name, body)

    def get_template(self, template_id: str) -> DocumentTemplate:
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.templates).where(storage.templates.c.id == template_id)
            ).first()
            if row is None:
                raise DomainError(E_NO_SUCH_TEMPLATE, f"no template {template_id}")
            return DocumentTemplate(row.id, row.scope_kind, row.name, row.body)

    def list_templates(self) -> list[DocumentTemplate]:
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.templates).order_by(storage.templates.c.id)
            ).all()
            return [DocumentTemplate(r.id, r.scope_kind, r.name, r.body) for r in rows]

    def render_report(self, actor: str, template_id: str, scope_instance_id: str) -> str:
        template = self.get_template(template_id)
        with self.db.transaction() as conn:
            self._check_instance_kind(conn, template.scope_kind, scope_instance_id)
            if template.scope_kind == ORG_SCOPE:
                require(conn, actor, Scope.org(scope_instance_id), "render_report")
                values = self._org_values(conn, scope_instance_id)
                tables: dict[str, list[list[str]]] = {}
            else:
                require(conn, actor, Scope.ws(scope_instance_id), "render_report")
                values, tables = self._ws_values(conn, scope_instance_id)

            def substitute(match: re.Match) -> str:
                inner = match.group(1).strip()
                table_match = TABLE_RE.match(inner)
                if table_match:
                    return self._render_table(
                        tag_catalog(template.scope_kind).tables[table_match.group(1)],
                        tables[table_match.group(1)],
                    )
                return _clean(values[inner])

            return TAG_RE.sub(substitute, template.body)

    def _check_instance_kind(self, conn, scope_kind: str, instance_id: str) -> None:
        org = conn.execute(select(storage.orgs.c.id).where(storage.orgs.c.id == instance_id)).first()
        ws = conn.execute(
            select(storage.workspaces.c.id).where(storage.workspaces.c.id == instance_id)
        ).first()
        if scope_kind == ORG_SCOPE and org is None:
            if ws is not None:
                raise DomainError(
                    E_SCOPE_MISMATCH,
                    f"{instance_id} is a workspace; this template renders organizations",
                )
            raise DomainError(E_NO_SUCH_ORG, f"no organization {instance_id}")
        if scope_kind == WS_SCOPE and ws is None:
            if org is not None:
                raise DomainError(
                    E_SCOPE_MISMATCH,
                    f"{instance_id} is an organization; this template renders workspaces",
                )
            raise DomainError(E_NO_SUCH_WS, f"no workspace {instance_id}")
        if scope_kind not in (ORG_SCOPE, WS_SCOPE):
            raise DomainError(E_SCOPE_MISMATCH, f"unknown template scope {scope_kind!r}")

    # -- value assembly ----------------------------------------------------

    def _org_values(self, conn, org_id: str) -> dict[str, str]:
        org = conn.execute(select(storage.orgs).where(storage.orgs.c.id == org_id)).first()
        if org is None:
            raise DomainError(E_NO_SUCH_ORG, f"no organization {org_id}")
        ws_rows = conn.execute(
            select(storage.workspaces.c.id).where(storage.workspaces.c.org_id == org_id)
        ).all()
        ws_ids = {w.id for w in ws_rows}
        members = set()
        for m in conn.execute(select(storage.memberships)):
            if (m.scope_kind == "org" and m.scope_id == org_id) or (
                m.scope_kind == "ws" and m.scope_id in ws_ids
            ):
                members.add(m.user_id)
        return {
            "organization.name": org.name,
            "organization.activity_type": org.activity_type,
            "organization.country": org.country,
            "organization.workspace_count": str(len(ws_ids)),
            "organization.member_count": str(len(members)),
        }

    def _ws_values(self, conn, ws_id: str):
        ws = conn.execute(
            select(storage.workspaces).where(storage.workspaces.c.id == ws_id)
        ).first()
        if ws is None:
            raise DomainError(E_NO_SUCH_WS, f"no workspace {ws_id}")
        org = conn.execute(select(storage.orgs).where(storage.orgs.c.id == ws.org_id)).first()
        values = {
            "workspace.name": ws.name,
            "workspace.process": ws.process,
            "workspace.status": ws.status,
            "workspace.benefits": ws.benefits,
            "workspace.success_criteria": ws.success_criteria,
            "workspace.planned_cost": format_money(ws.planned_cost),
            "workspace.current_cost": format_money(ws.current_cost),
            "workspace.planned_start": ws.planned_start,
            "workspace.planned_end": ws.planned_end,
            "organization.name": org.name if org else "",
            "organization.activity_type": org.activity_type if org else "",
            "organization.country": org.country if org else "",
        }

        stakeholder_rows = [
            [r.stakeholder_id, r.name, r.email, r.role]
            for r in conn.execute(
                select(storage.stakeholders)
                .where(storage.stakeholders.c.ws_id == ws_id)
                .order_by(storage.stakeholders.c.stakeholder_id)
            )
        ]
        backlog_rows = [
            [r.item_id, r.name, r.item_type, r.priority, r.status, format_hours(r.effort_estimate)]
            for r in conn.execute(
                select(storage.backlog_items)
                .where(storage.backlog_items.c.ws_id == ws_id)
                .order_by(storage.backlog_items.c.item_id)
            )
        ]
        sprint_rows = conn.execute(
            select(storage.sprints)
            .where(storage.sprints.c.ws_id == ws_id)
            .order_by(storage.sprints.c.id)
        ).all()
        sprint_names = {s.id: s.name for s in sprint_rows}
        sprint_table = [
            [s.name, s.start_date, s.end_date, s.state]
            for s in sorted(sprint_rows, key=lambda s: s.id)
        ]
        task_rows = [
            [
                t.task_id,
                sprint_names.get(t.sprint_id, "") if t.sprint_id else "",
                t.name,
                t.task_type,
                t.priority,
                t.status,
                format_hours(t.planned_effort),
            ]
            for t in conn.execute(
                select(storage.tasks)
                .where(storage.tasks.c.ws_id == ws_id)
                .order_by(storage.tasks.c.task_id)
            )
        ]
        tables = {
            "stakeholders": stakeholder_rows,
            "product_backlog": backlog_rows,
            "sprints": sprint_table,
            "tasks": task_rows,
        }
        return values, tables

    @staticmethod
    def _render_table(columns: tuple[str, ...], rows: list[list[str]]) -> str:
        header = "| " + " | ".join(columns) + " |"
        divider = "| " + " | ".join("---" for _ in columns) + " |"
        lines = [header, divider]
        for row in rows:
            lines.append("| " + " | ".join(_clean(cell) for cell in row) + " |")
        return "\n".join(lines)

    def _require_contributor(self, conn, actor: str) -> None:
        """Template registration needs Member standing somewhere on the platform."""
        rows = conn.execute(
            select(storage.memberships.c.role).where(storage.memberships.c.user_id == actor)
        ).all()
        if not any(Role(r.role).at_least(Role.MEMBER) for r in rows):
            raise DomainError(
                E_FORBIDDEN, "registering templates requires Member standing on some scope"
            )
