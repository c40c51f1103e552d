"""Roles and the role-by-action authorization matrix.

The full matrix is documented in docs/permissions.md; this module is the
single executable source of it. Rules:

- Roles are totally ordered: PlatformAdmin > OrganizationManager >
  WorkspaceManager > Member > Viewer. An action passes when the actor's
  effective role on the scope ranks at least the action's minimum role.
- An org-level OrganizationManager (or PlatformAdmin) also administers every
  workspace of that org. Org-level Member/Viewer grant no workspace rights.
- Any workspace membership grants Viewer visibility of the owning org.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from sqlalchemy import select
from sqlalchemy.engine import Connection

from . import storage
from .errors import DomainError, E_FORBIDDEN


class Role(str, enum.Enum):
    PLATFORM_ADMIN = "PlatformAdmin"
    ORGANIZATION_MANAGER = "OrganizationManager"
    WORKSPACE_MANAGER = "WorkspaceManager"
    MEMBER = "Member"
    VIEWER = "Viewer"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def outranks(self, other: "Role") -> bool:
        return self.rank > other.rank

    def at_least(self, other: "Role") -> bool:
        return self.rank >= other.rank


_RANK = {
    Role.VIEWER: 1,
    Role.MEMBER: 2,
    Role.WORKSPACE_MANAGER: 3,
    Role.ORGANIZATION_MANAGER: 4,
    Role.PLATFORM_ADMIN: 5,
}


@dataclass(frozen=True)
class Scope:
    kind: str  # "platform" | "org" | "ws"
    id: str

    @staticmethod
    def org(org_id: str) -> "Scope":
        return Scope("org", org_id)

    @staticmethod
    def ws(ws_id: str) -> "Scope":
        return Scope("ws", ws_id)


PLATFORM = Scope("platform", "*")

# Minimum role per action, keyed by scope kind. Reads are Viewer; work-item
# mutations are Member; scope administration is the scope's manager role.
ACTION_MIN_ROLE: dict[tuple[str, str], Role] = {
    ("org", "view"): Role.VIEWER,
    ("org", "update_settings"): Role.ORGANIZATION_MANAGER,
    ("org", "create_workspace"): Role.ORGANIZATION_MANAGER,
    ("org", "assign_role"): Role.ORGANIZATION_MANAGER,
    ("org", "invite"): Role.ORGANIZATION_MANAGER,
    ("org", "upload_file"): Role.MEMBER,
    ("org", "download_file"): Role.VIEWER,
    ("org", "render_report"): Role.VIEWER,
    ("ws", "view"): Role.VIEWER,
    ("ws", "update_settings"): Role.WORKSPACE_MANAGER,
    ("ws", "set_process"): Role.WORKSPACE_MANAGER,
    ("ws", "assign_role"): Role.WORKSPACE_MANAGER,
    ("ws", "invite"): Role.WORKSPACE_MANAGER,
    ("ws", "manage_backlog"): Role.MEMBER,
    ("ws", "manage_sprints"): Role.MEMBER,
    ("ws", "manage_tasks"): Role.MEMBER,
    ("ws", "record_effort"): Role.MEMBER,
    ("ws", "import_data"): Role.MEMBER,
    ("ws", "upload_file"): Role.MEMBER,
    ("ws", "download_file"): Role.VIEWER,
    ("ws", "render_report"): Role.VIEWER,
}


def effective_role(conn: Connection, user_id: str, scope: Scope) -> Role | None:
    """Resolve the strongest role ``user_id`` holds on ``scope``, if any."""
    rows = conn.execute(
        select(
            storage.memberships.c.scope_kind,
            storage.memberships.c.scope_id,
            storage.memberships.c.role,
        ).where(storage.memberships.c.user_id == user_id)
    ).all()
    roles: list[Role] = []
    ws_org: str | None = None
    if scope.kind == "ws":
        ws = conn.execute(
            select(storage.workspaces.c.org_id).where(storage.workspaces.c.id == scope.id)
        ).first()
        ws_org = ws.org_id if ws is not None else None
    org_ws_ids: set[str] | None = None
    for row in rows:
        role = Role(row.role)
        if row.scope_kind == "platform":
            roles.append(role)
        elif row.scope_kind == scope.kind and row.scope_id == scope.id:
            roles.append(role)
        elif scope.kind == "ws" and row.scope_kind == "org" and row.scope_id == ws_org:
            # Org managers cascade into the org's workspaces; lower org roles don't.
            if role.at_least(Role.ORGANIZATION_MANAGER):
                roles.append(role)
        elif scope.kind == "org" and row.scope_kind == "ws":
            if org_ws_ids is None:
                org_ws_ids = {
                    w.id
                    for w in conn.execute(
                        select(storage.workspaces.c.id).where(
                            storage.workspaces.c.org_id == scope.id
                        )
                    )
                }
            if row.scope_id in org_ws_ids:
                roles.append(Role.VIEWER)  # ws membership => read-only org visibility
    if not roles:
        return None
    return max(roles, key=lambda r: r.rank)


def is_allowed(role: Role | None, scope_kind: str, action: str) -> bool:
    if role is None:
        return False
    minimum = ACTION_MIN_ROLE[(scope_kind, action)]
    return role.at_least(minimum)


def require(conn: Connection, user_id: str, scope: Scope, action: str) -> Role:
    """Raise E-FORBIDDEN unless the actor may perform ``action`` on ``scope``."""
    role = effective_role(conn, user_id, scope)
    if not is_allowed(role, scope.kind, action):
        raise DomainError(E_FORBIDDEN, f"{action} on {scope.kind} {scope.id} denied")
    return role  # type: ignore[return-value]
