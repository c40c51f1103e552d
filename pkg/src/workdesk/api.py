"""HTTP/JSON surface: routes, bearer auth, error envelope, and the live feed.

Every domain error code maps to exactly one HTTP status (ERROR_STATUS); the
response envelope is ``{"error": {"code", "message", "field"}}``. All routes
except /health, registration/login, and invite deep links require a bearer
session token.
"""

from __future__ import annotations

import json
import queue
import time
from datetime import date
from typing import Literal

from fastapi import Depends, FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response, StreamingResponse
from pydantic import BaseModel

from . import errors
from .agile import ItemType, Priority, SprintState, TaskStatus
from .authz import Role, Scope
from .backend import Backend
from .errors import DomainError
from .events import EVENT_KINDS, DomainEvent
from .importer import ImportPlan, ImportScope, ImportSelection, parse_workbook
from .reports import tag_catalog
from .tenancy import Invitation, Membership, Organization, Process, Workspace, WorkspaceStatus

ERROR_STATUS: dict[str, int] = {
    errors.E_UNAUTHENTICATED: 401,
    errors.E_FORBIDDEN: 403,
    errors.E_WRONG_INVITEE: 403,
    errors.E_NO_SUCH_ORG: 404,
    errors.E_NO_SUCH_WS: 404,
    errors.E_NO_SUCH_USER: 404,
    errors.E_UNKNOWN_USER: 404,
    errors.E_NO_SUCH_ITEM: 404,
    errors.E_NO_SUCH_TASK: 404,
    errors.E_NO_SUCH_SPRINT: 404,
    errors.E_NO_SUCH_FILE: 404,
    errors.E_NO_SUCH_VERSION: 404,
    errors.E_NO_SUCH_INVITE: 404,
    errors.E_NO_SUCH_TEMPLATE: 404,
    errors.E_NO_SUCH_NOTIFICATION: 404,
    errors.E_EMAIL_TAKEN: 409,
    errors.E_DUPLICATE_INVITE: 409,
    errors.E_NOT_PENDING: 409,
    errors.E_DUP_ITEM_ID: 409,
    errors.E_DUP_TASK_ID: 409,
    errors.E_SPRINT_ACTIVE: 409,
    errors.E_NO_ACTIVE_SPRINT: 409,
    errors.E_NOT_ACTIVE: 409,
    errors.E_SPRINT_CLOSED: 409,
    errors.E_STALE_BOARD: 409,
    errors.E_STALE_PLAN: 409,
    errors.E_HAS_CONFLICTS: 409,
    errors.E_NOT_EMPTY: 409,
    errors.E_PROCESS_MISMATCH: 409,
    errors.E_BAD_EMAIL: 422,
    errors.E_WEAK_PASSWORD: 422,
    errors.E_EMPTY_NAME: 422,
    errors.E_BAD_DATES: 422,
    errors.E_NEG_COST: 422,
    errors.E_DAY_OUT_OF_RANGE: 422,
    errors.E_NEG_EFFORT: 422,
    errors.E_EMPTY_ENTRY: 422,
    errors.E_NOT_XLSX: 422,
    errors.E_NO_RECOGNIZED_SHEETS: 422,
    errors.E_MISSING_ID_COLUMN: 422,
    errors.E_BAD_SELECTION: 422,
    errors.E_TAG_UNKNOWN: 422,
    errors.E_TAG_SYNTAX: 422,
    errors.E_SCOPE_MISMATCH: 422,
    errors.E_UNKNOWN_KIND: 422,
    errors.E_NOT_ACTIONABLE: 422,
    errors.E_VALIDATION: 422,
}

#: Operation-to-route table; the suite checks it against the live app.
OPERATION_ROUTES: dict[str, list[tuple[str, str]]] = {
    "core.register_user": [("POST", "/auth/register")],
    "core.login": [("POST", "/auth/login")],
    "core.create_organization": [("POST", "/orgs")],
    "core.update_organization_settings": [("PATCH", "/orgs/{org_id}")],
    "core.create_workspace": [("POST", "/orgs/{org_id}/workspaces")],
    "core.update_workspace_settings": [("PATCH", "/workspaces/{ws_id}")],
    "core.assign_role": [
        ("PUT", "/orgs/{org_id}/members/{user_id}"),
        ("PUT", "/workspaces/{ws_id}/members/{user_id}"),
    ],
    "core.create_invitation": [
        ("POST", "/orgs/{org_id}/invites"),
        ("POST", "/workspaces/{ws_id}/invites"),
    ],
    "core.resolve_invitation": [
        ("GET", "/invites/{token}/accept"),
        ("GET", "/invites/{token}/reject"),
    ],
    "core.upload_file": [
        ("POST", "/workspaces/{ws_id}/files"),
        ("POST", "/orgs/{org_id}/files"),
    ],
    "core.download_file": [("GET", "/files/{file_id}")],
    "agile.add_backlog_item": [("POST", "/workspaces/{ws_id}/backlog")],
    "agile.create_sprint": [("POST", "/workspaces/{ws_id}/sprints")],
    "agile.close_sprint": [("POST", "/sprints/{sprint_id}/close")],
    "agile.create_task": [
        ("POST", "/sprints/{sprint_id}/tasks"),
        ("POST", "/workspaces/{ws_id}/tasks"),
    ],
    "agile.record_effort": [("PUT", "/tasks/{gid}/effort/{day}")],
    "agile.move_task": [("PATCH", "/tasks/{gid}/move")],
    "agile.set_process": [("PATCH", "/workspaces/{ws_id}/process")],
    "import.plan_import": [("POST", "/workspaces/{ws_id}/import/plan")],
    "import.commit_import": [("POST", "/workspaces/{ws_id}/import/commit")],
    "analytics.org_summary": [("GET", "/orgs/{org_id}/summary")],
    "analytics.org_analytics": [("GET", "/orgs/{org_id}/analytics")],
    "analytics.workspace_analytics": [("GET", "/workspaces/{ws_id}/analytics")],
    "analytics.sprint_burndown": [("GET", "/sprints/{sprint_id}/burndown")],
    "analytics.sprint_actual_cumulative": [("GET", "/sprints/{sprint_id}/actual-cumulative")],
    "analytics.sprint_history_stats": [("GET", "/sprints/{sprint_id}/stats")],
    "report.register_template": [("POST", "/templates")],
    "report.render_report": [("POST", "/templates/{template_id}/render")],
    "report.tag_catalog": [("GET", "/templates/catalog/{scope_kind}")],
    "notify.publish_event": [("POST", "/admin/events")],
    "notify.deadline_scan": [("POST", "/admin/deadline-scan")],
    "notify.fetch_notifications": [("GET", "/notifications")],
    "notify.act_on_notification": [("POST", "/notifications/{notif_id}/act")],
}


# -- request bodies -----------------------------------------------------------


class RegisterBody(BaseModel):
    email: str
    display_name: str
    password: str


class LoginBody(BaseModel):
    email: str
    password: str


class OrgBody(BaseModel):
    name: str
    activity_type: str = ""
    country: str = ""


class OrgPatch(BaseModel):
    name: str | None = None
    activity_type: str | None = None
    country: str | None = None


class WorkspaceBody(BaseModel):
    name: str
    process: Literal["Scrum", "Kanban"]
    status: Literal["Active", "Canceled", "Completed"] = "Active"
    benefits: str = ""
    success_criteria: str = ""
    planned_cost: float = 0.0
    current_cost: float = 0.0
    planned_start: date
    planned_end: date


class WorkspacePatch(BaseModel):
    name: str | None = None
    status: Literal["Active", "Canceled", "Completed"] | None = None
    benefits: str | None = None
    success_criteria: str | None = None
    planned_cost: float | None = None
    current_cost: float | None = None
    planned_start: date | None = None
    planned_end: date | None = None


class ProcessBody(BaseModel):
    process: Literal["Scrum", "Kanban"]


class InviteBody(BaseModel):
    invitee_email: str
    offered_role: Literal[
        "PlatformAdmin", "OrganizationManager", "WorkspaceManager", "Member", "Viewer"
    ] = "Member"


class RoleBody(BaseModel):
    role: Literal[
        "PlatformAdmin", "OrganizationManager", "WorkspaceManager", "Member", "Viewer"
    ]


class ItemBody(BaseModel):
    name: str
    item_type: Literal["Feature", "Improvement", "Bug", "Issue"] = "Feature"
    priority: Literal["High", "Medium", "Low"] = "Medium"
    description: str | None = None
    effort_estimate: float = 0.0
    status: Literal["Open", "InProgress", "Done"] = "Open"
    item_id: str | None = None


class SprintBody(BaseModel):
    name: str
    start: date
    end: date
    stakeholder_ids: list[str] = []


class TaskBody(BaseModel):
    name: str | None = None
    item_type: Literal["Feature", "Improvement", "Bug", "Issue"] = "Feature"
    priority: Literal["High", "Medium", "Low"] = "Medium"
    description: str | None = None
    assignees: list[str] = []
    planned_effort: float = 0.0
    source_item_id: str | None = None
    task_id: str | None = None


class MoveBody(BaseModel):
    new_status: Literal["ToDo", "InProgress", "Done"]
    expected_board_version: int


class EffortBody(BaseModel):
    remaining: float | None = None
    actual: float | None = None


class TemplateBody(BaseModel):
    scope_kind: Literal["Organization", "Workspace"]
    name: str
    body: str


class RenderBody(BaseModel):
    scope_instance_id: str


class ActBody(BaseModel):
    decision: Literal["Accept", "Reject"]


class EventBody(BaseModel):
    kind: str
    payload: dict = {}


# -- serializers ----------------------------------------------------------------


def org_dict(org: Organization) -> dict:
    return {
        "id": org.org_id,
        "name": org.name,
        "activity_type": org.activity_type,
        "country": org.country,
        "created_by": org.created_by,
    }


def ws_dict(ws: Workspace) -> dict:
    return {
        "id": ws.ws_id,
        "org_id": ws.org_id,
        "name": ws.name,
        "process": ws.process.value,
        "status": ws.status.value,
        "benefits": ws.benefits,
        "success_criteria": ws.success_criteria,
        "planned_cost": ws.planned_cost,
        "current_cost": ws.current_cost,
        "planned_start": ws.planned_start.isoformat(),
        "planned_end": ws.planned_end.isoformat(),
        "board_version": ws.board_version,
    }


def invite_dict(invite: Invitation) -> dict:
    return {
        "id": invite.invite_id,
        "inviter": invite.inviter,
        "invitee_email": invite.invitee_email,
        "scope_kind": invite.scope.kind,
        "scope_id": invite.scope.id,
        "offered_role": invite.offered_role.value,
        "state": invite.state.value,
    }


def membership_dict(member: Membership) -> dict:
    return {
        "user_id": member.user_id,
        "scope_kind": member.scope.kind,
        "scope_id": member.scope.id,
        "role": member.role.value,
    }


def item_dict(item) -> dict:
    return {
        "item_id": item.item_id,
        "ws_id": item.ws_id,
        "name": item.name,
        "description": item.description,
        "item_type": item.item_type.value,
        "priority": item.priority.value,
        "status": item.status.value,
        "effort_estimate": item.effort_estimate,
    }


def sprint_dict(sprint) -> dict:
    return {
        "id": sprint.sprint_id,
        "ws_id": sprint.ws_id,
        "name": sprint.name,
        "start": sprint.start.isoformat(),
        "end": sprint.end.isoformat(),
        "stakeholder_ids": list(sprint.stakeholder_ids),
        "state": sprint.state.value,
        "day_count": sprint.day_count,
    }


def task_dict(task) -> dict:
    return {
        "id": task.gid,
        "task_id": task.task_id,
        "ws_id": task.ws_id,
        "sprint_id": task.sprint_id,
        "name": task.name,
        "description": task.description,
        "item_type": task.task_type.value,
        "priority": task.priority.value,
        "assignees": list(task.assignees),
        "planned_effort": task.planned_effort,
        "status": task.status.value,
        "source_item_id": task.source_item_id,
        "completed_at": task.completed_at.isoformat() if task.completed_at else None,
    }


# -- app factory -------------------------------------------------------------------


def create_app(backend: Backend) -> FastAPI:
    app = FastAPI(title="workdesk", version="0.1.0")
    app.state.backend = backend

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, exc: DomainError):
        status = ERROR_STATUS.get(exc.code, 400)
        payload = {"error": {"code": exc.code, "message": exc.message, "field": exc.field}}
        return JSONResponse(status_code=status, content=payload)

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(p) for p in first.get("loc", ())[1:]) or None
        return JSONResponse(
            status_code=422,
            content={
                "error": {
                    "code": errors.E_VALIDATION,
                    "message": first.get("msg", "invalid request"),
                    "field": field,
                }
            },
        )

    def current_user(request: Request):
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise DomainError(errors.E_UNAUTHENTICATED, "missing bearer token")
        return backend.identity.authenticate(header[7:].strip())

    def require_platform_admin(user) -> None:
        role = backend.tenancy.effective_role(user.user_id, Scope("platform", "*"))
        if role != Role.PLATFORM_ADMIN:
            raise DomainError(errors.E_FORBIDDEN, "platform administrators only")

    # -- health and auth ------------------------------------------------------

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/auth/register", status_code=201)
    def register(body: RegisterBody):
        account = backend.register_user(body.email, body.display_name, body.password)
        return {"user_id": account.user_id, "email": account.email,
                "display_name": account.display_name}

    @app.post("/auth/login")
    def login(body: LoginBody):
        token = backend.identity.login(body.email, body.password)
        return {"token": token}

    # -- organizations ----------------------------------------------------------

    @app.post("/orgs", status_code=201)
    def create_org(body: OrgBody, user=Depends(current_user)):
        org = backend.tenancy.create_organization(
            user.user_id, body.name, body.activity_type, body.country
        )
        return org_dict(org)

    @app.get("/orgs")
    def list_orgs(user=Depends(current_user)):
        return [org_dict(o) for o in backend.tenancy.organizations_visible_to(user.user_id)]

    @app.get("/orgs/{org_id}")
    def get_org(org_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.org(org_id), "view")
        return org_dict(backend.tenancy.get_organization(org_id))

    @app.patch("/orgs/{org_id}")
    def patch_org(org_id: str, body: OrgPatch, user=Depends(current_user)):
        org = backend.tenancy.update_organization_settings(
            user.user_id, org_id, body.name, body.activity_type, body.country
        )
        return org_dict(org)

    @app.get("/orgs/{org_id}/members")
    def org_members(
        org_id: str,
        user=Depends(current_user),
        role: str | None = None,
        sort: Literal["user_id", "email", "display_name"] = "user_id",
        limit: int = 50,
        offset: int = 0,
    ):
        backend.tenancy.require(user.user_id, Scope.org(org_id), "view")
        members = backend.tenancy.members_of(Scope.org(org_id))
        rows = []
        for member in members:
            if role and member.role.value != role:
                continue
            account = backend.identity.get_user(member.user_id)
            rows.append(
                membership_dict(member)
                | {"email": account.email, "display_name": account.display_name}
            )
        rows.sort(key=lambda r: r[sort])
        return rows[offset : offset + limit]

    @app.put("/orgs/{org_id}/members/{user_id}")
    def org_assign_role(org_id: str, user_id: str, body: RoleBody, user=Depends(current_user)):
        member = backend.tenancy.assign_role(
            user.user_id, Scope.org(org_id), user_id, Role(body.role)
        )
        return membership_dict(member)

    @app.post("/orgs/{org_id}/invites", status_code=201)
    def org_invite(org_id: str, body: InviteBody, user=Depends(current_user)):
        invite = backend.tenancy.create_invitation(
            user.user_id, Scope.org(org_id), body.invitee_email, Role(body.offered_role)
        )
        return invite_dict(invite)

    @app.get("/orgs/{org_id}/summary")
    def org_summary(org_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.org(org_id), "view")
        return backend.analytics.org_summary(org_id)

    @app.get("/orgs/{org_id}/analytics")
    def org_analytics(org_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.org(org_id), "view")
        return {"series": [s.to_dict() for s in backend.analytics.org_analytics(org_id)]}

    # -- workspaces ----------------------------------------------------------------

    @app.post("/orgs/{org_id}/workspaces", status_code=201)
    def create_workspace(org_id: str, body: WorkspaceBody, user=Depends(current_user)):
        ws = backend.tenancy.create_workspace(
            user.user_id,
            org_id,
            body.name,
            Process(body.process),
            WorkspaceStatus(body.status),
            body.benefits,
            body.success_criteria,
            body.planned_cost,
            body.current_cost,
            body.planned_start,
            body.planned_end,
        )
        return ws_dict(ws)

    @app.get("/orgs/{org_id}/workspaces")
    def list_workspaces(org_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.org(org_id), "view")
        visible = []
        for ws in backend.tenancy.workspaces_of(org_id):
            if backend.tenancy.effective_role(user.user_id, Scope.ws(ws.ws_id)) is not None:
                visible.append(ws_dict(ws))
        return visible

    @app.get("/workspaces/{ws_id}")
    def get_workspace(ws_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "view")
        return ws_dict(backend.tenancy.get_workspace(ws_id))

    @app.patch("/workspaces/{ws_id}")
    def patch_workspace(ws_id: str, body: WorkspacePatch, user=Depends(current_user)):
        fields = {k: v for k, v in body.model_dump().items() if v is not None}
        ws = backend.tenancy.update_workspace_settings(user.user_id, ws_id, **fields)
        return ws_dict(ws)

    @app.patch("/workspaces/{ws_id}/process")
    def set_process(ws_id: str, body: ProcessBody, user=Depends(current_user)):
        backend.agile.set_process(user.user_id, ws_id, Process(body.process))
        return ws_dict(backend.tenancy.get_workspace(ws_id))

    @app.get("/workspaces/{ws_id}/members")
    def ws_members(ws_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "view")
        members = backend.tenancy.members_of(Scope.ws(ws_id))
        return [membership_dict(m) for m in members]

    @app.put("/workspaces/{ws_id}/members/{user_id}")
    def ws_assign_role(ws_id: str, user_id: str, body: RoleBody, user=Depends(current_user)):
        member = backend.tenancy.assign_role(
            user.user_id, Scope.ws(ws_id), user_id, Role(body.role)
        )
        return membership_dict(member)

    @app.post("/workspaces/{ws_id}/invites", status_code=201)
    def ws_invite(ws_id: str, body: InviteBody, user=Depends(current_user)):
        invite = backend.tenancy.create_invitation(
            user.user_id, Scope.ws(ws_id), body.invitee_email, Role(body.offered_role)
        )
        return invite_dict(invite)

    @app.get("/workspaces/{ws_id}/analytics")
    def workspace_analytics(ws_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "view")
        bundle = backend.analytics.workspace_analytics(ws_id)
        return {name: series.to_dict() for name, series in bundle.items()}

    # -- backlog -----------------------------------------------------------------------

    @app.post("/workspaces/{ws_id}/backlog", status_code=201)
    def add_backlog_item(ws_id: str, body: ItemBody, user=Depends(current_user)):
        item = backend.agile.add_backlog_item(
            user.user_id,
            ws_id,
            body.name,
            item_type=ItemType(body.item_type),
            priority=Priority(body.priority),
            description=body.description,
            effort_estimate=body.effort_estimate,
            status=body.status,
            item_id=body.item_id,
        )
        return item_dict(item)

    @app.get("/workspaces/{ws_id}/backlog")
    def list_backlog(ws_id: str, user=Depends(current_user)):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "view")
        return [item_dict(i) for i in backend.agile.backlog(ws_id)]

    # -- sprints ------------------------------------------------------------------------

    @app.post("/workspaces/{ws_id}/sprints", status_code=201)
    def create_sprint(ws_id: str, body: SprintBody, user=Depends(current_user)):
        sprint = backend.agile.create_sprint(
            user.user_id, ws_id, body.name, body.start, body.end, body.stakeholder_ids
        )
        return sprint_dict(sprint)

    @app.get("/workspaces/{ws_id}/sprints")
    def list_sprints(
        ws_id: str,
        user=Depends(current_user),
        state: Literal["active", "closed"] | None = None,
    ):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "view")
        chosen = None if state is None else SprintState(state.capitalize())
        return [sprint_dict(s) for s in backend.agile.sprints_of(ws_id, chosen)]

    @app.get("/sprints/{sprint_id}")
    def get_sprint(sprint_id: str, user=Depends(current_user)):
        sprint = backend.agile.get_sprint(sprint_id)
        backend.tenancy.require(user.user_id, Scope.ws(sprint.ws_id), "view")
        return sprint_dict(sprint)

    @app.post("/sprints/{sprint_id}/close")
    def close_sprint(sprint_id: str, user=Depends(current_user)):
        return sprint_dict(backend.agile.close_sprint(user.user_id, sprint_id))

    @app.post("/sprints/{sprint_id}/tasks", status_code=201)
    def create_sprint_task(sprint_id: str, body: TaskBody, user=Depends(current_user)):
        sprint = backend.agile.get_sprint(sprint_id)
        task = backend.agile.create_task(
            user.user_id,
            sprint.ws_id,
            sprint_id=sprint_id,
            name=body.name,
            item_type=ItemType(body.item_type),
            priority=Priority(body.priority),
            description=body.description,
            assignees=body.assignees,
            planned_effort=body.planned_effort,
            source_item_id=body.source_item_id,
            task_id=body.task_id,
        )
        return task_dict(task)

    @app.get("/sprints/{sprint_id}/tasks")
    def sprint_tasks(sprint_id: str, user=Depends(current_user)):
        sprint = backend.agile.get_sprint(sprint_id)
        backend.tenancy.require(user.user_id, Scope.ws(sprint.ws_id), "view")
        return [task_dict(t) for t in backend.agile.tasks_of(sprint.ws_id, sprint_id=sprint_id)]

    @app.get("/sprints/{sprint_id}/burndown")
    def sprint_burndown(sprint_id: str, user=Depends(current_user)):
        sprint = backend.agile.get_sprint(sprint_id)
        backend.tenancy.require(user.user_id, Scope.ws(sprint.ws_id), "view")
        return backend.analytics.sprint_burndown(sprint_id).to_dict()

    @app.get("/sprints/{sprint_id}/actual-cumulative")
    def sprint_actual_cumulative(sprint_id: str, user=Depends(current_user)):
        sprint = backend.agile.get_sprint(sprint_id)
        backend.tenancy.require(user.user_id, Scope.ws(sprint.ws_id), "view")
        return backend.analytics.sprint_actual_cumulative(sprint_id).to_dict()

    @app.get("/sprints/{sprint_id}/stats")
    def sprint_stats(sprint_id: str, user=Depends(current_user)):
        sprint = backend.agile.get_sprint(sprint_id)
        backend.tenancy.require(user.user_id, Scope.ws(sprint.ws_id), "view")
        return backend.analytics.sprint_history_stats(sprint_id).to_dict()

    # -- tasks -------------------------------------------------------------------------------

    @app.post("/workspaces/{ws_id}/tasks", status_code=201)
    def create_board_task(ws_id: str, body: TaskBody, user=Depends(current_user)):
        task = backend.agile.create_task(
            user.user_id,
            ws_id,
            sprint_id=None,
            name=body.name,
            item_type=ItemType(body.item_type),
            priority=Priority(body.priority),
            description=body.description,
            assignees=body.assignees,
            planned_effort=body.planned_effort,
            source_item_id=body.source_item_id,
            task_id=body.task_id,
        )
        return task_dict(task)

    @app.get("/workspaces/{ws_id}/tasks")
    def list_tasks(
        ws_id: str,
        user=Depends(current_user),
        status: Literal["ToDo", "InProgress", "Done"] | None = None,
        assignee: str | None = None,
        sort: Literal["task_id", "priority", "status", "name"] = "task_id",
        limit: int = 50,
        offset: int = 0,
    ):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "view")
        rows = [task_dict(t) for t in backend.agile.tasks_of(ws_id)]
        if status:
            rows = [t for t in rows if t["status"] == status]
        if assignee:
            rows = [t for t in rows if assignee in t["assignees"]]
        rows.sort(key=lambda t: str(t[sort]))
        return rows[offset : offset + limit]

    @app.patch("/tasks/{gid}/move")
    def move_task(gid: str, body: MoveBody, user=Depends(current_user)):
        task = backend.agile.get_task_by_gid(gid)
        moved, version = backend.agile.move_task(
            user.user_id,
            task.ws_id,
            task.task_id,
            TaskStatus(body.new_status),
            body.expected_board_version,
        )
        return {"task": task_dict(moved), "board_version": version}

    @app.put("/tasks/{gid}/effort/{day}")
    def record_effort(gid: str, day: int, body: EffortBody, user=Depends(current_user)):
        task = backend.agile.get_task_by_gid(gid)
        entry = backend.agile.record_effort(
            user.user_id, task.ws_id, task.task_id, day,
            remaining=body.remaining, actual=body.actual,
        )
        return {
            "task_id": entry.task_id,
            "day": entry.day,
            "remaining": entry.remaining,
            "actual": entry.actual,
        }

    @app.get("/tasks/{gid}/effort")
    def task_effort(gid: str, user=Depends(current_user)):
        task = backend.agile.get_task_by_gid(gid)
        backend.tenancy.require(user.user_id, Scope.ws(task.ws_id), "view")
        return [
            {"task_id": e.task_id, "day": e.day, "remaining": e.remaining, "actual": e.actual}
            for e in backend.agile.effort_for_task(task.ws_id, task.task_id)
        ]

    # -- files --------------------------------------------------------------------------------

    @app.post("/workspaces/{ws_id}/files", status_code=201)
    def upload_ws_file(ws_id: str, file: UploadFile = File(...), user=Depends(current_user)):
        info = backend.files.upload(
            user.user_id, Scope.ws(ws_id), file.filename or "upload", file.file.read()
        )
        return {"file_id": info.file_id, "name": info.name, "version": info.latest_version}

    @app.post("/orgs/{org_id}/files", status_code=201)
    def upload_org_file(org_id: str, file: UploadFile = File(...), user=Depends(current_user)):
        info = backend.files.upload(
            user.user_id, Scope.org(org_id), file.filename or "upload", file.file.read()
        )
        return {"file_id": info.file_id, "name": info.name, "version": info.latest_version}

    @app.get("/workspaces/{ws_id}/files")
    def list_ws_files(ws_id: str, user=Depends(current_user)):
        infos = backend.files.list_files(user.user_id, Scope.ws(ws_id))
        return [
            {"file_id": i.file_id, "name": i.name, "version": i.latest_version} for i in infos
        ]

    @app.get("/files/{file_id}")
    def download_file(file_id: str, user=Depends(current_user), version: int | None = None):
        content = backend.files.download(user.user_id, file_id, version)
        return Response(content=content, media_type="application/octet-stream")

    # -- import -------------------------------------------------------------------------------

    @app.post("/workspaces/{ws_id}/import/plan")
    def import_plan(
        ws_id: str,
        file: UploadFile = File(...),
        scope: Literal["All", "ProductBacklog", "Tasks", "Stakeholders"] = Form("All"),
        rows: str | None = Form(None),
        user=Depends(current_user),
    ):
        backend.tenancy.require(user.user_id, Scope.ws(ws_id), "import_data")
        model = parse_workbook(file.file.read())
        row_filter = None
        if rows:
            try:
                row_filter = frozenset((str(s), int(r)) for s, r in json.loads(rows))
            except (ValueError, TypeError):
                raise DomainError(errors.E_BAD_SELECTION, "rows must be a JSON list of [sheet, row]")
        plan = backend.importer.plan_import(
            ws_id, model, ImportSelection(ImportScope(scope), row_filter)
        )
        return {
            "plan": plan.to_dict(),
            "warnings": [
                {"sheet": w.sheet, "row": w.row, "message": w.message} for w in model.warnings
            ],
        }

    @app.post("/workspaces/{ws_id}/import/commit")
    def import_commit(ws_id: str, payload: dict, user=Depends(current_user)):
        plan_data = payload.get("plan", payload)
        plan = ImportPlan.from_dict(plan_data)
        if plan.ws_id != ws_id:
            raise DomainError(errors.E_BAD_SELECTION, "plan belongs to a different workspace")
        report = backend.importer.commit_import(user.user_id, ws_id, plan)
        return report.to_dict()

    # -- templates ------------------------------------------------------------------------------

    @app.post("/templates", status_code=201)
    def register_template(body: TemplateBody, user=Depends(current_user)):
        template = backend.reports.register_template(
            user.user_id, body.scope_kind, body.name, body.body
        )
        return {
            "id": template.template_id,
            "scope_kind": template.scope_kind,
            "name": template.name,
        }

    @app.get("/templates")
    def list_templates(user=Depends(current_user)):
        return [
            {"id": t.template_id, "scope_kind": t.scope_kind, "name": t.name}
            for t in backend.reports.list_templates()
        ]

    @app.get("/templates/catalog/{scope_kind}")
    def get_tag_catalog(scope_kind: Literal["Organization", "Workspace"],
                        user=Depends(current_user)):
        return tag_catalog(scope_kind).to_dict()

    @app.post("/templates/{template_id}/render")
    def render_template(template_id: str, body: RenderBody, user=Depends(current_user)):
        text = backend.reports.render_report(user.user_id, template_id, body.scope_instance_id)
        return PlainTextResponse(text, media_type="text/markdown; charset=utf-8")

    # -- notifications ----------------------------------------------------------------------------

    @app.get("/notifications")
    def notifications(
        user=Depends(current_user),
        unread: int = 0,
        limit: int = 50,
        offset: int = 0,
    ):
        feed = backend.notifications.fetch(
            user.user_id, unread_only=bool(unread), limit=limit, offset=offset
        )
        return [n.to_dict() for n in feed]

    @app.post("/notifications/{notif_id}/act")
    def act_on_notification(notif_id: str, body: ActBody, user=Depends(current_user)):
        invite = backend.notifications.act_on_notification(
            user.user_id, notif_id, body.decision == "Accept"
        )
        return invite_dict(invite)

    @app.post("/notifications/{notif_id}/read")
    def mark_read(notif_id: str, user=Depends(current_user)):
        backend.notifications.mark_read(user.user_id, notif_id)
        return {"ok": True}

    @app.get("/notifications/stream")
    def notification_stream(
        user=Depends(current_user),
        timeout_s: float = 30.0,
        max_events: int | None = None,
    ):
        subscription = backend.hub.subscribe(user.user_id)

        def event_lines():
            deadline = time.monotonic() + timeout_s
            sent = 0
            try:
                while time.monotonic() < deadline:
                    try:
                        item = subscription.get(timeout=0.2)
                    except queue.Empty:
                        continue
                    yield json.dumps(item) + "\n"
                    sent += 1
                    if max_events is not None and sent >= max_events:
                        break
            finally:
                backend.hub.unsubscribe(user.user_id, subscription)

        return StreamingResponse(event_lines(), media_type="application/x-ndjson")

    # -- invite deep links --------------------------------------------------------------------------

    @app.get("/invites/{token}/accept")
    def accept_invite(token: str):
        return invite_dict(backend.tenancy.resolve_by_token(token, accept=True))

    @app.get("/invites/{token}/reject")
    def reject_invite(token: str):
        return invite_dict(backend.tenancy.resolve_by_token(token, accept=False))

    # -- operator/admin ------------------------------------------------------------------------------

    @app.get("/admin/outbox")
    def outbox(user=Depends(current_user)):
        require_platform_admin(user)
        return backend.notifications.outbox()

    @app.post("/admin/deadline-scan")
    def deadline_scan(user=Depends(current_user), threshold_days: int | None = None):
        require_platform_admin(user)
        created = backend.notifications.deadline_scan(threshold_days=threshold_days)
        return {"notifications_created": created}

    @app.post("/admin/events")
    def publish_event(body: EventBody, user=Depends(current_user)):
        require_platform_admin(user)
        with backend.db.transaction() as conn:
            if body.kind in EVENT_KINDS:
                backend.bus.emit(conn, body.kind, body.payload, backend.clock())
            else:
                backend.notifications.publish_event(
                    DomainEvent("evt-adhoc", body.kind, body.payload, backend.clock()),
                    conn=conn,
                )
        return {"ok": True}

    @app.post("/admin/expire-invitations")
    def expire_invitations(user=Depends(current_user)):
        require_platform_admin(user)
        return {"expired": backend.tenancy.expire_invitations()}

    return app
