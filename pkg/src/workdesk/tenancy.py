"""Organizations, workspaces, memberships, and the invitation state machine."""

from __future__ import annotations

import enum
import secrets
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Callable

from sqlalchemy import insert, select, update
from sqlalchemy.engine import Connection
from sqlalchemy.exc import IntegrityError

from . import events, storage
from .authz import Role, Scope, effective_role, require
from .errors import (
    DomainError,
    E_BAD_DATES,
    E_DUPLICATE_INVITE,
    E_EMPTY_NAME,
    E_NEG_COST,
    E_NO_SUCH_INVITE,
    E_NO_SUCH_ORG,
    E_NO_SUCH_WS,
    E_NOT_PENDING,
    E_UNKNOWN_USER,
    E_WRONG_INVITEE,
)
from .identity import IdentityService, normalize_email

INVITE_EXPIRY = timedelta(days=30)


class Process(str, enum.Enum):
    SCRUM = "Scrum"
    KANBAN = "Kanban"


class WorkspaceStatus(str, enum.Enum):
    ACTIVE = "Active"
    CANCELED = "Canceled"
    COMPLETED = "Completed"


class InviteState(str, enum.Enum):
    PENDING = "Pending"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    EXPIRED = "Expired"


@dataclass(frozen=True)
class Organization:
    org_id: str
    name: str
    activity_type: str
    country: str
    created_by: str


@dataclass(frozen=True)
class Workspace:
    ws_id: str
    org_id: str
    name: str
    process: Process
    status: WorkspaceStatus
    benefits: str
    success_criteria: str
    planned_cost: float
    current_cost: float
    planned_start: date
    planned_end: date
    board_version: int


@dataclass(frozen=True)
class Membership:
    user_id: str
    scope: Scope
    role: Role


@dataclass(frozen=True)
class Invitation:
    invite_id: str
    token: str
    inviter: str
    invitee_email: str
    scope: Scope
    offered_role: Role
    state: InviteState


def _row_to_org(row) -> Organization:
    return Organization(row.id, row.name, row.activity_type, row.country, row.created_by)


def _row_to_ws(row) -> Workspace:
    return Workspace(
        ws_id=row.id,
        org_id=row.org_id,
        name=row.name,
        process=Process(row.process),
        status=WorkspaceStatus(row.status),
        benefits=row.benefits,
        success_criteria=row.success_criteria,
        planned_cost=row.planned_cost,
        current_cost=row.current_cost,
        planned_start=date.fromisoformat(row.planned_start),
        planned_end=date.fromisoformat(row.planned_end),
        board_version=row.board_version,
    )


def _row_to_invite(row) -> Invitation:
    return Invitation(
        invite_id=row.id,
        token=row.token,
        inviter=row.inviter,
        invitee_email=row.invitee_email,
        scope=Scope(row.scope_kind, row.scope_id),
        offered_role=Role(row.offered_role),
        state=InviteState(row.state),
    )


class TenancyService:
    def __init__(
        self,
        db: storage.Database,
        bus: events.EventBus,
        identity: IdentityService,
        clock: Callable[[], datetime],
        token_factory: Callable[[], str] | None = None,
    ):
        self.db = db
        self.bus = bus
        self.identity = identity
        self.clock = clock
        self.token_factory = token_factory or (lambda: secrets.token_urlsafe(24))

    # -- organizations ---------------------------------------------------

    def create_organization(
        self, creator: str, name: str, activity_type: str = "", country: str = ""
    ) -> Organization:
        if not name.strip():
            raise DomainError(E_EMPTY_NAME, "organization name must not be empty", field="name")
        with self.db.transaction() as conn:
            self.identity.get_user(creator)  # raises for unknown creator
            org_id = self.db.new_id(conn, "org")
            conn.execute(
                insert(storage.orgs).values(
                    id=org_id,
                    name=name.strip(),
                    activity_type=activity_type,
                    country=country,
                    created_by=creator,
                    created_at=self.clock().isoformat(),
                )
            )
            self._put_membership(conn, creator, Scope.org(org_id), Role.ORGANIZATION_MANAGER)
            return Organization(org_id, name.strip(), activity_type, country, creator)

    def update_organization_settings(
        self,
        actor: str,
        org_id: str,
        name: str | None = None,
        activity_type: str | None = None,
        country: str | None = None,
    ) -> Organization:
        with self.db.transaction() as conn:
            self._org_row(conn, org_id)
            require(conn, actor, Scope.org(org_id), "update_settings")
            changes: dict = {}
            if name is not None:
                if not name.strip():
                    raise DomainError(E_EMPTY_NAME, "organization name must not be empty", field="name")
                changes["name"] = name.strip()
            if activity_type is not None:
                changes["activity_type"] = activity_type
            if country is not None:
                changes["country"] = country
            if changes:
                conn.execute(
                    update(storage.orgs).where(storage.orgs.c.id == org_id).values(**changes)
                )
            return _row_to_org(self._org_row(conn, org_id))

    def get_organization(self, org_id: str) -> Organization:
        with self.db.transaction() as conn:
            return _row_to_org(self._org_row(conn, org_id))

    def organizations_visible_to(self, user_id: str) -> list[Organization]:
        """Orgs the user belongs to, directly or through one of their workspaces."""
        with self.db.transaction() as conn:
            rows = conn.execute(select(storage.orgs).order_by(storage.orgs.c.id)).all()
            visible = []
            for row in rows:
                if effective_role(conn, user_id, Scope.org(row.id)) is not None:
                    visible.append(_row_to_org(row))
            return visible

    # -- workspaces --------------------------------------------------------

    def create_workspace(
        self,
        actor: str,
        org_id: str,
        name: str,
        process: Process,
        status: WorkspaceStatus,
        benefits: str,
        success_criteria: str,
        planned_cost: float,
        current_cost: float,
        planned_start: date,
        planned_end: date,
    ) -> Workspace:
        if not name.strip():
            raise DomainError(E_EMPTY_NAME, "workspace name must not be empty", field="name")
        if planned_start > planned_end:
            raise DomainError(E_BAD_DATES, "planned_start is after planned_end")
        if planned_cost < 0 or current_cost < 0:
            raise DomainError(E_NEG_COST, "costs must be >= 0")
        with self.db.transaction() as conn:
            self._org_row(conn, org_id)
            require(conn, actor, Scope.org(org_id), "create_workspace")
            ws_id = self.db.new_id(conn, "ws")
            conn.execute(
                insert(storage.workspaces).values(
                    id=ws_id,
                    org_id=org_id,
                    name=name.strip(),
                    process=Process(process).value,
                    status=WorkspaceStatus(status).value,
                    benefits=benefits,
                    success_criteria=success_criteria,
                    planned_cost=float(planned_cost),
                    current_cost=float(current_cost),
                    planned_start=planned_start.isoformat(),
                    planned_end=planned_end.isoformat(),
                    board_version=0,
                    created_at=self.clock().isoformat(),
                )
            )
            self._put_membership(conn, actor, Scope.ws(ws_id), Role.WORKSPACE_MANAGER)
            return _row_to_ws(self._ws_row(conn, ws_id))

    def update_workspace_settings(self, actor: str, ws_id: str, **fields) -> Workspace:
        """Partial update of workspace metadata (not process — see agile engine)."""
        allowed = {
            "name",
            "status",
            "benefits",
            "success_criteria",
            "planned_cost",
            "current_cost",
            "planned_start",
            "planned_end",
        }
        unknown = set(fields) - allowed
        if unknown:
            raise DomainError(E_BAD_DATES, f"unknown workspace fields: {sorted(unknown)}")
        with self.db.transaction() as conn:
            current = _row_to_ws(self._ws_row(conn, ws_id))
            require(conn, actor, Scope.ws(ws_id), "update_settings")
            merged = {
                "name": fields.get("name", current.name),
                "status": WorkspaceStatus(fields.get("status", current.status)).value,
                "benefits": fields.get("benefits", current.benefits),
                "success_criteria": fields.get("success_criteria", current.success_criteria),
                "planned_cost": float(fields.get("planned_cost", current.planned_cost)),
                "current_cost": float(fields.get("current_cost", current.current_cost)),
                "planned_start": _as_date(fields.get("planned_start", current.planned_start)),
                "planned_end": _as_date(fields.get("planned_end", current.planned_end)),
            }
            if not str(merged["name"]).strip():
                raise DomainError(E_EMPTY_NAME, "workspace name must not be empty", field="name")
            if merged["planned_start"] > merged["planned_end"]:
                raise DomainError(E_BAD_DATES, "planned_start is after planned_end")
            if merged["planned_cost"] < 0 or merged["current_cost"] < 0:
                raise DomainError(E_NEG_COST, "costs must be >= 0")
            conn.execute(
                update(storage.workspaces)
                .where(storage.workspaces.c.id == ws_id)
                .values(
                    name=str(merged["name"]).strip(),
                    status=merged["status"],
                    benefits=merged["benefits"],
                    success_criteria=merged["success_criteria"],
                    planned_cost=merged["planned_cost"],
                    current_cost=merged["current_cost"],
                    planned_start=merged["planned_start"].isoformat(),
                    planned_end=merged["planned_end"].isoformat(),
                )
            )
            return _row_to_ws(self._ws_row(conn, ws_id))

    def get_workspace(self, ws_id: str) -> Workspace:
        with self.db.transaction() as conn:
            return _row_to_ws(self._ws_row(conn, ws_id))

    def workspaces_of(self, org_id: str) -> list[Workspace]:
        with self.db.transaction() as conn:
            self._org_row(conn, org_id)
            rows = conn.execute(
                select(storage.workspaces)
                .where(storage.workspaces.c.org_id == org_id)
                .order_by(storage.workspaces.c.id)
            ).all()
            return [_row_to_ws(r) for r in rows]

    # -- roles and memberships ----------------------------------------------

    def assign_role(self, actor: str, scope: Scope, target_user: str, role: Role) -> Membership:
        with self.db.transaction() as conn:
            self._check_scope_exists(conn, scope)
            require(conn, actor, scope, "assign_role")
            try:
                self.identity.get_user(target_user)
            except DomainError:
                raise DomainError(E_UNKNOWN_USER, f"no user {target_user}")
            self._put_membership(conn, target_user, scope, role)
            return Membership(target_user, scope, role)

    def grant_platform_admin(self, user_id: str) -> None:
        """Bootstrap hook: platform admins are created by config or seed, not API."""
        with self.db.transaction() as conn:
            self._put_membership(conn, user_id, Scope("platform", "*"), Role.PLATFORM_ADMIN)

    def members_of(self, scope: Scope) -> list[Membership]:
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.memberships)
                .where(
                    storage.memberships.c.scope_kind == scope.kind,
                    storage.memberships.c.scope_id == scope.id,
                )
                .order_by(storage.memberships.c.user_id)
            ).all()
            return [Membership(r.user_id, scope, Role(r.role)) for r in rows]

    def effective_role(self, user_id: str, scope: Scope) -> Role | None:
        with self.db.transaction() as conn:
            return effective_role(conn, user_id, scope)

    def require(self, user_id: str, scope: Scope, action: str) -> Role:
        with self.db.transaction() as conn:
            self._check_scope_exists(conn, scope)  # unknown scope is 404, not 403
            return require(conn, user_id, scope, action)

    # -- invitations --------------------------------------------------------

    def create_invitation(
        self, actor: str, scope: Scope, invitee_email: str, offered_role: Role
    ) -> Invitation:
        invitee_email = normalize_email(invitee_email)
        with self.db.transaction() as conn:
            self._check_scope_exists(conn, scope)
            require(conn, actor, scope, "invite")
            pending = conn.execute(
                select(storage.invitations).where(
                    storage.invitations.c.invitee_email == invitee_email,
                    storage.invitations.c.scope_kind == scope.kind,
                    storage.invitations.c.scope_id == scope.id,
                    storage.invitations.c.state == InviteState.PENDING.value,
                )
            ).first()
            if pending is not None:
                raise DomainError(
                    E_DUPLICATE_INVITE,
                    f"a pending invite for {invitee_email} on this scope already exists",
                )
            invite_id = self.db.new_id(conn, "inv")
            token = self.token_factory()
            try:
                conn.execute(
                    insert(storage.invitations).values(
                        id=invite_id,
                        token=token,
                        inviter=actor,
                        invitee_email=invitee_email,
                        scope_kind=scope.kind,
                        scope_id=scope.id,
                        offered_role=offered_role.value,
                        state=InviteState.PENDING.value,
                        created_at=self.clock().isoformat(),
                    )
                )
            except IntegrityError:
                raise DomainError(
                    E_DUPLICATE_INVITE,
                    f"a pending invite for {invitee_email} on this scope already exists",
                )
            invite = Invitation(
                invite_id, token, actor, invitee_email, scope, offered_role, InviteState.PENDING
            )
            registered = self.identity.find_by_email(invitee_email)
            self.bus.emit(
                conn,
                events.INVITE_CREATED,
                {
                    "invite_id": invite_id,
                    "token": token,
                    "inviter": actor,
                    "invitee_email": invitee_email,
                    "invitee_user_id": registered.user_id if registered else None,
                    "scope_kind": scope.kind,
                    "scope_id": scope.id,
                    "offered_role": offered_role.value,
                },
                self.clock(),
            )
            return invite

    def resolve_invitation(self, invitee: str, invite_id: str, accept: bool) -> Invitation:
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.invitations).where(storage.invitations.c.id == invite_id)
            ).first()
            if row is None:
                raise DomainError(E_NO_SUCH_INVITE, f"no invitation {invite_id}")
            user = self.identity.get_user(invitee)
            if user.email != row.invitee_email:
                raise DomainError(E_WRONG_INVITEE, "invitation was issued to a different email")
            if row.state != InviteState.PENDING.value:
                raise DomainError(E_NOT_PENDING, f"invitation is {row.state}, not Pending")
            new_state = InviteState.ACCEPTED if accept else InviteState.REJECTED
            conn.execute(
                update(storage.invitations)
                .where(storage.invitations.c.id == invite_id)
                .values(state=new_state.value)
            )
            scope = Scope(row.scope_kind, row.scope_id)
            if accept:
                self._put_membership(conn, invitee, scope, Role(row.offered_role))
            self.bus.emit(
                conn,
                events.INVITE_ACCEPTED if accept else events.INVITE_REJECTED,
                {
                    "invite_id": invite_id,
                    "inviter": row.inviter,
                    "invitee_user_id": invitee,
                    "invitee_email": row.invitee_email,
                    "scope_kind": scope.kind,
                    "scope_id": scope.id,
                    "decision": "Accept" if accept else "Reject",
                },
                self.clock(),
            )
            return _row_to_invite(
                conn.execute(
                    select(storage.invitations).where(storage.invitations.c.id == invite_id)
                ).first()
            )

    def resolve_by_token(self, token: str, accept: bool) -> Invitation:
        """Email deep-link path: the token authenticates possession of the invite."""
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.invitations).where(storage.invitations.c.token == token)
            ).first()
            if row is None:
                raise DomainError(E_NO_SUCH_INVITE, "no invitation for this token")
            account = self.identity.find_by_email(row.invitee_email)
            if account is None:
                raise DomainError(
                    E_UNKNOWN_USER,
                    f"{row.invitee_email} has no account yet; register first, then follow the link again",
                )
            return self.resolve_invitation(account.user_id, row.id, accept)

    def expire_invitations(self, now: datetime | None = None) -> int:
        """Scan-driven expiry: flips Pending invites older than 30 days."""
        now = now or self.clock()
        cutoff = now - INVITE_EXPIRY
        flipped = 0
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.invitations).where(
                    storage.invitations.c.state == InviteState.PENDING.value
                )
            ).all()
            for row in rows:
                if datetime.fromisoformat(row.created_at) <= cutoff:
                    conn.execute(
                        update(storage.invitations)
                        .where(storage.invitations.c.id == row.id)
                        .values(state=InviteState.EXPIRED.value)
                    )
                    flipped += 1
        return flipped

    def get_invitation(self, invite_id: str) -> Invitation:
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.invitations).where(storage.invitations.c.id == invite_id)
            ).first()
            if row is None:
                raise DomainError(E_NO_SUCH_INVITE, f"no invitation {invite_id}")
            return _row_to_invite(row)

    def invitations_for_scope(self, scope: Scope) -> list[Invitation]:
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.invitations)
                .where(
                    storage.invitations.c.scope_kind == scope.kind,
                    storage.invitations.c.scope_id == scope.id,
                )
                .order_by(storage.invitations.c.id)
            ).all()
            return [_row_to_invite(r) for r in rows]

    # -- helpers ------------------------------------------------------------

    def _put_membership(self, conn: Connection, user_id: str, scope: Scope, role: Role) -> None:
        existing = conn.execute(
            select(storage.memberships).where(
                storage.memberships.c.user_id == user_id,
                storage.memberships.c.scope_kind == scope.kind,
                storage.memberships.c.scope_id == scope.id,
            )
        ).first()
        if existing is None:
            conn.execute(
                insert(storage.memberships).values(
                    user_id=user_id, scope_kind=scope.kind, scope_id=scope.id, role=role.value
                )
            )
        elif existing.role != role.value:
            conn.execute(
                update(storage.memberships)
                .where(
                    storage.memberships.c.user_id == user_id,
                    storage.memberships.c.scope_kind == scope.kind,
                    storage.memberships.c.scope_id == scope.id,
                )
                .values(role=role.value)
            )

    def _org_row(self, conn: Connection, org_id: str):
        row = conn.execute(select(storage.orgs).where(storage.orgs.c.id == org_id)).first()
        if row is None:
            raise DomainError(E_NO_SUCH_ORG, f"no organization {org_id}")
        return row

    def _ws_row(self, conn: Connection, ws_id: str):
        row = conn.execute(
            select(storage.workspaces).where(storage.workspaces.c.id == ws_id)
        ).first()
        if row is None:
            raise DomainError(E_NO_SUCH_WS, f"no workspace {ws_id}")
        return row

    def _check_scope_exists(self, conn: Connection, scope: Scope) -> None:
        if scope.kind == "org":
            self._org_row(conn, scope.id)
        elif scope.kind == "ws":
            self._ws_row(conn, scope.id)


def _as_date(value) -> date:
    return value if isinstance(value, date) else date.fromisoformat(str(value))
