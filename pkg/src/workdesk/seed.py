"""Deterministic demo fixture: one bank, three workspaces, two closed sprints
with full effort histories, a live sprint, a kanban board, and pending invites.

The fixture script drives only public operations with a fixed clock and a
counting token factory, so two seeds of two empty stores produce identical
content (credential salts excluded). ``BIER_EXPECTED`` holds the hand-tallied
answers the dashboards must reproduce; the test suite re-derives them from the
raw fixture tables below with independent brute-force tallies.
"""

from __future__ import annotations

import hashlib
import json
from datetime import date, datetime, timezone

from sqlalchemy import select

from . import storage, xlsxio
from .authz import Role, Scope
from .backend import Backend
from .errors import DomainError, E_NOT_EMPTY
from .importer import ImportScope, ImportSelection, parse_workbook
from .tenancy import Process, WorkspaceStatus

FIXTURES = ("bier",)

DEMO_PASSWORD = "bier-demo-pw"
ADMIN_EMAIL = "admin@workdesk.example"

ORG_NAME = "Bank of Investment and Economic Recovery"

USERS = [
    ("ana@bier.example", "Ana Marques"),
    ("bruno@bier.example", "Bruno Silva"),
    ("carla@bier.example", "Carla Reis"),
    ("diogo@bier.example", "Diogo Costa"),
    ("eva@bier.example", "Eva Pinto"),
    ("grace@bier.example", "Grace Lopes"),
]

# Loan Portal sprint 1 arrives by workbook import: (day, remaining, actual) per task.
LP_SPRINT1_TASKS = [
    # (task id, name, type, priority, assignees, planned hours)
    ("T-1", "Build login flow", "Feature", "High", "S1;S2", 20),
    ("T-2", "Session management", "Feature", "High", "S1", 16),
    ("T-3", "Account overview UI", "Feature", "Medium", "S2", 12),
    ("T-4", "Overview API", "Feature", "Medium", "S3", 10),
    ("T-5", "Fix login redirect", "Bug", "Medium", "S1", 8),
]

LP_SPRINT1_EFFORT = {
    "T-1": [(2, 16, 4), (5, 10, 6), (9, 6, 5), (12, 2, 3), (14, 0, 2)],
    "T-2": [(3, 12, 4), (7, 8, 4), (11, 4, 4), (14, 0, 2)],
    "T-3": [(4, 9, 3), (8, 6, 3), (10, 3, 3), (13, 0, 1)],
    "T-4": [(6, 7, 3), (12, 3, 4), (14, 0, 1)],
    "T-5": [(2, 6, 2), (5, 4, 2), (9, 2, 2), (14, 0, 2)],
}

LP_BACKLOG = [
    # (id, name, type, priority, status, effort)
    ("PBI-1", "User login", "Feature", "High", "Done", 20),
    ("PBI-2", "Account overview", "Feature", "High", "Done", 16),
    ("PBI-3", "Loan application form", "Feature", "Medium", "Done", 12),
    ("PBI-4", "Credit score check", "Feature", "Medium", "Done", 10),
    ("PBI-5", "Document upload", "Feature", "Medium", "InProgress", 8),
    ("PBI-6", "Repayment calculator", "Improvement", "Low", "InProgress", 8),
    ("PBI-7", "Fix session timeout", "Bug", "High", "InProgress", 6),
    ("PBI-8", "Loan officer dashboard", "Feature", "Medium", "InProgress", 12),
    ("PBI-9", "Email reminders", "Improvement", "Low", "Open", 6),
    ("PBI-10", "Audit trail", "Issue", "Medium", "Open", 10),
]

LP_STAKEHOLDERS = [
    ("S1", "Bruno Silva", "bruno@bier.example", "Developer"),
    ("S2", "Carla Reis", "carla@bier.example", "Developer"),
    ("S3", "Diogo Costa", "diogo@bier.example", "Tester"),
    ("S4", "Ana Marques", "ana@bier.example", "Manager"),
]

# Sprint 2 is played interactively: (task id expected, name, type, priority,
# assignees, planned, [(day, remaining, actual)], done-timestamp or None)
LP_SPRINT2_SCRIPT = [
    ("T-6", "Loan form wizard", "Feature", "High", ["S1"], 16,
     [(1, 12, 4), (3, 8, 6), (5, 4, 6), (8, 0, 4)], "2022-04-08T15:00"),
    ("T-7", "Credit check integration", "Feature", "High", ["S2"], 14,
     [(2, 10, 6), (4, 6, 6), (9, 0, 6)], "2022-04-12T15:00"),
    ("T-8", "Document upload service", "Feature", "Medium", ["S3"], 12,
     [(3, 8, 5), (6, 4, 5), (10, 0, 6)], "2022-04-14T15:00"),
    ("T-9", "Fix rounding bug", "Bug", "Medium", ["S1"], 6,
     [(5, 4, 4), (7, 2, 4), (11, 0, 6)], "2022-04-15T15:00"),
    ("T-10", "Calculator UX polish", "Improvement", "Low", ["S2"], 8,
     [(6, 5, 4), (8, 2, 4), (12, 1, 4)], None),
]

LP_SPRINT3_SCRIPT = [
    # T-11 is pulled from backlog item PBI-9; T-12 is manual.
    ("T-11", None, None, None, ["S1"], None, [(1, 4, 2), (3, 2, 2)], None),
    ("T-12", "Ops runbook", "Feature", "Low", ["S3"], 8, [(2, 6, 2), (4, 4, 2)], None),
]

MB_BACKLOG = [
    ("PBI-1", "Biometric login", "Feature", "High", "Done", 12),
    ("PBI-2", "Push notifications", "Feature", "Medium", "Done", 10),
    ("PBI-3", "Dark mode", "Improvement", "Low", "InProgress", 4),
]

MB_SPRINT1_SCRIPT = [
    ("T-1", "Biometric auth", "Feature", "High", ["eva"], 12,
     [(2, 8, 4), (5, 0, 4)], "2022-01-17T15:00"),
    ("T-2", "Face ID fallback", "Feature", "Medium", ["bruno"], 8,
     [(3, 5, 3), (7, 0, 3)], "2022-01-20T15:00"),
    ("T-3", "Login telemetry", "Improvement", "Low", ["eva"], 4,
     [(4, 0, 4)], "2022-01-21T15:00"),
]

MB_SPRINT2_SCRIPT = [
    ("T-4", "Push service", "Feature", "High", ["eva"], 10,
     [(2, 5, 5), (6, 0, 5)], "2022-02-12T15:00"),
    ("T-5", "Notification prefs", "Feature", "Medium", ["bruno"], 8,
     [(4, 4, 4), (8, 0, 4)], "2022-02-16T15:00"),
    ("T-6", "Badge counts", "Improvement", "Low", ["bruno"], 4,
     [(5, 2, 2), (9, 0, 2)], "2022-02-18T15:00"),
]

BD_BOARD_SCRIPT = [
    # (task id, name, type, priority, planned, [(day, remaining, actual)], done-at, in-progress-at)
    ("T-1", "Branch map", "Feature", "Medium", 10, [(5, 6, 4), (8, 0, 6)], "2022-02-15T15:00", None),
    ("T-2", "Teller stats", "Feature", "Medium", 8, [(20, 4, 4), (25, 0, 4)], "2022-03-03T15:00", None),
    ("T-3", "Queue monitor", "Feature", "Low", 6, [(30, 4, 2)], None, "2022-03-20T15:00"),
    ("T-4", "Wait-time alerts", "Issue", "Medium", 4, [], None, None),
]

#: Hand-tallied answers for the seeded dashboards. The acceptance suite also
#: re-derives each one from the raw tables above with brute-force tallies.
BIER_EXPECTED = {
    "most_items_solved_workspace": "Loan Portal",
    "over_budget_workspace": "Mobile Banking App",
    "loan_portal_sprint1_remaining_day12": 14.0,
    "busiest_sprint": "Sprint 2",
    "loan_portal_items_completed": 4,
    "done_tasks_per_workspace": {
        "Loan Portal": 9,
        "Mobile Banking App": 6,
        "Branch Dashboard": 2,
    },
    "completions_by_month": {"2022-01": 3, "2022-02": 4, "2022-03": 6, "2022-04": 4},
    "org_member_count": 5,
    "loan_portal_sprint_hours": {"Sprint 1": 60.0, "Sprint 2": 80.0, "Sprint 3": 8.0},
}


def _utc(stamp: str) -> datetime:
    return datetime.fromisoformat(stamp).replace(tzinfo=timezone.utc)


def loan_portal_workbook() -> bytes:
    """The workbook the fixture imports to reconstruct Loan Portal history."""
    effort_rows: list[list] = [["TaskID", "Day", "Remaining", "Actual"]]
    for task_id, _name, _t, _p, _a, _planned in LP_SPRINT1_TASKS:
        for day, remaining, actual in LP_SPRINT1_EFFORT[task_id]:
            effort_rows.append([task_id, day, remaining, actual])
    return xlsxio.write_workbook(
        {
            "ProjectInfo": [
                ["Key", "Value"],
                ["Benefits", "Faster loan origination"],
                ["SuccessCriteria", "Loan processing under 48h"],
                ["CurrentCost", 32000],
            ],
            "Stakeholders": [["ID", "Name", "Email", "Role"], *map(list, LP_STAKEHOLDERS)],
            "ProductBacklog": [
                ["ID", "Name", "Description", "Type", "Priority", "Status", "Effort"],
                *[
                    [item_id, name, None, item_type, priority, status, effort]
                    for item_id, name, item_type, priority, status, effort in LP_BACKLOG
                ],
            ],
            "Tasks": [
                ["ID", "Sprint", "Name", "Description", "Type", "Priority", "AssignedTo",
                 "PlannedEffort", "Status"],
                *[
                    [task_id, "Sprint 1", name, None, item_type, priority, assigned, planned, "Done"]
                    for task_id, name, item_type, priority, assigned, planned in LP_SPRINT1_TASKS
                ],
            ],
            "Effort": effort_rows,
        }
    )


def seed(backend: Backend, fixture: str = "bier", force: bool = False) -> dict:
    if fixture not in FIXTURES:
        raise ValueError(f"unknown fixture {fixture!r}; available: {FIXTURES}")
    if not backend.db.is_empty():
        if not force:
            raise DomainError(E_NOT_EMPTY, "store is not empty; use force to reseed")
        storage.metadata.drop_all(backend.db.engine)
        backend.db.migrate()
    return _seed_bier(backend)


def _seed_bier(backend: Backend) -> dict:
    clock = backend.clock
    counter = {"n": 0}

    def next_token() -> str:
        counter["n"] += 1
        return f"seed-token-{counter['n']}"

    backend.tenancy.token_factory = next_token

    clock.fix(_utc("2022-01-05T09:00"))
    users = {}
    for email, name in USERS:
        users[email.split("@")[0]] = backend.register_user(email, name, DEMO_PASSWORD)
    admin = backend.register_user(ADMIN_EMAIL, "Platform Admin", "admin-demo-pw")
    backend.tenancy.grant_platform_admin(admin.user_id)

    ana = users["ana"].user_id
    org = backend.tenancy.create_organization(ana, ORG_NAME, "Banking", "PT")

    loan_portal = backend.tenancy.create_workspace(
        ana, org.org_id, "Loan Portal", Process.SCRUM, WorkspaceStatus.ACTIVE,
        "", "", 50000, 0, date(2022, 3, 1), date(2022, 7, 31),
    )
    mobile = backend.tenancy.create_workspace(
        ana, org.org_id, "Mobile Banking App", Process.SCRUM, WorkspaceStatus.ACTIVE,
        "Bank anywhere", "4.5-star store rating", 80000, 95000,
        date(2022, 1, 10), date(2022, 6, 30),
    )
    dashboard = backend.tenancy.create_workspace(
        ana, org.org_id, "Branch Dashboard", Process.KANBAN, WorkspaceStatus.ACTIVE,
        "Branch visibility", "All branches reporting", 30000, 12000,
        date(2022, 2, 1), date(2022, 5, 31),
    )

    for user, role in (("bruno", Role.MEMBER), ("carla", Role.MEMBER), ("diogo", Role.MEMBER)):
        backend.tenancy.assign_role(ana, Scope.ws(loan_portal.ws_id), users[user].user_id, role)
    for user, role in (("bruno", Role.MEMBER), ("eva", Role.MEMBER)):
        backend.tenancy.assign_role(ana, Scope.ws(mobile.ws_id), users[user].user_id, role)
    backend.tenancy.assign_role(ana, Scope.ws(dashboard.ws_id), users["eva"].user_id, Role.VIEWER)

    # Loan Portal: sprint 1 history arrives from the workbook.
    clock.fix(_utc("2022-03-15T10:00"))
    workbook = loan_portal_workbook()
    backend.files.upload(ana, Scope.ws(loan_portal.ws_id), "psl-project.xlsx", workbook)
    backend.files.upload(ana, Scope.ws(loan_portal.ws_id), "psl-project.xlsx", workbook)
    plan = backend.importer.plan_import(
        loan_portal.ws_id, parse_workbook(workbook), ImportSelection(ImportScope.ALL)
    )
    backend.importer.commit_import(ana, loan_portal.ws_id, plan)

    # Loan Portal: sprint 2 is played through the interactive surface.
    _play_sprint(
        backend, ana, loan_portal.ws_id, "Sprint 2",
        date(2022, 4, 4), date(2022, 4, 17), ["S1", "S2", "S3"],
        "2022-04-04T09:00", LP_SPRINT2_SCRIPT, close_at="2022-04-18T09:00",
    )

    # Loan Portal: sprint 3 stays active; one task is pulled from the backlog.
    clock.fix(_utc("2022-05-02T09:00"))
    sprint3 = backend.agile.create_sprint(
        ana, loan_portal.ws_id, "Sprint 3", date(2022, 5, 2), date(2022, 5, 15), ["S1", "S2"]
    )
    pulled = backend.agile.create_task(
        ana, loan_portal.ws_id, sprint_id=sprint3.sprint_id,
        source_item_id="PBI-9", assignees=["S1"],
    )
    assert pulled.task_id == "T-11"
    backend.agile.create_task(
        ana, loan_portal.ws_id, sprint_id=sprint3.sprint_id, name="Ops runbook",
        item_type="Feature", priority="Low", assignees=["S3"], planned_effort=8,
    )
    for task_id, _n, _t, _p, _a, _pl, effort, _done in LP_SPRINT3_SCRIPT:
        for day, remaining, actual in effort:
            backend.agile.record_effort(
                ana, loan_portal.ws_id, task_id, day, remaining=remaining, actual=actual
            )
    clock.fix(_utc("2022-05-04T10:00"))
    _move(backend, ana, loan_portal.ws_id, "T-11", "InProgress")

    # Mobile Banking App: two closed sprints, then the workspace completes.
    for item_id, name, item_type, priority, status, effort in MB_BACKLOG:
        backend.agile.add_backlog_item(
            ana, mobile.ws_id, name, item_type=item_type, priority=priority,
            status=status, effort_estimate=effort, item_id=item_id,
        )
    _play_sprint(
        backend, ana, mobile.ws_id, "MB Sprint 1",
        date(2022, 1, 10), date(2022, 1, 23), ["eva", "bruno"],
        "2022-01-10T09:00", MB_SPRINT1_SCRIPT, close_at="2022-01-24T09:00",
    )
    _play_sprint(
        backend, ana, mobile.ws_id, "MB Sprint 2",
        date(2022, 2, 7), date(2022, 2, 20), ["eva", "bruno"],
        "2022-02-07T09:00", MB_SPRINT2_SCRIPT, close_at="2022-02-21T09:00",
    )
    clock.fix(_utc("2022-07-01T09:00"))
    backend.tenancy.update_workspace_settings(ana, mobile.ws_id, status="Completed")

    # Branch Dashboard: kanban board, later canceled.
    clock.fix(_utc("2022-02-01T09:00"))
    for task_id, name, item_type, priority, planned, effort, done_at, progress_at in BD_BOARD_SCRIPT:
        created = backend.agile.create_task(
            ana, dashboard.ws_id, name=name, item_type=item_type,
            priority=priority, planned_effort=planned,
        )
        assert created.task_id == task_id
        for day, remaining, actual in effort:
            backend.agile.record_effort(
                ana, dashboard.ws_id, task_id, day, remaining=remaining, actual=actual
            )
    for task_id, *_rest, done_at, progress_at in BD_BOARD_SCRIPT:
        if done_at:
            clock.fix(_utc(done_at))
            _move(backend, ana, dashboard.ws_id, task_id, "Done")
        elif progress_at:
            clock.fix(_utc(progress_at))
            _move(backend, ana, dashboard.ws_id, task_id, "InProgress")
    clock.fix(_utc("2022-06-01T09:00"))
    backend.tenancy.update_workspace_settings(ana, dashboard.ws_id, status="Canceled")

    # Pending invites: one to a stranger (email outbox), one to a member-to-be.
    clock.fix(_utc("2022-09-01T09:00"))
    backend.tenancy.create_invitation(
        ana, Scope.org(org.org_id), "frank@bier.example", Role.MEMBER
    )
    backend.tenancy.create_invitation(
        ana, Scope.ws(loan_portal.ws_id), "grace@bier.example", Role.MEMBER
    )

    clock.fix(_utc("2022-09-15T12:00"))
    return {
        "org_id": org.org_id,
        "workspaces": {
            "Loan Portal": loan_portal.ws_id,
            "Mobile Banking App": mobile.ws_id,
            "Branch Dashboard": dashboard.ws_id,
        },
        "users": {name: account.user_id for name, account in users.items()},
        "admin": admin.user_id,
    }


def _play_sprint(backend, actor, ws_id, name, start, end, stakeholders, start_at, script, close_at):
    clock = backend.clock
    clock.fix(_utc(start_at))
    sprint = backend.agile.create_sprint(actor, ws_id, name, start, end, stakeholders)
    for task_id, task_name, item_type, priority, assignees, planned, _e, _d in script:
        created = backend.agile.create_task(
            actor, ws_id, sprint_id=sprint.sprint_id, name=task_name,
            item_type=item_type, priority=priority, assignees=assignees,
            planned_effort=planned,
        )
        assert created.task_id == task_id
    for task_id, *_mid, effort, _done in script:
        for day, remaining, actual in effort:
            backend.agile.record_effort(
                actor, ws_id, task_id, day, remaining=remaining, actual=actual
            )
    for task_id, *_mid, done_at in script:
        if done_at:
            clock.fix(_utc(done_at))
            _move(backend, actor, ws_id, task_id, "Done")
    clock.fix(_utc(close_at))
    backend.agile.close_sprint(actor, sprint.sprint_id)
    return sprint


def _move(backend, actor, ws_id, task_id, status):
    version = backend.tenancy.get_workspace(ws_id).board_version
    backend.agile.move_task(actor, ws_id, task_id, status, version)


def seed_state_hash(db) -> str:
    """Digest of all seeded content except credential salts and session tokens."""
    snapshot: dict = {}
    with db.transaction() as conn:
        for table in sorted(storage.metadata.tables):
            if table in ("sessions", "schema_migrations", "id_counters"):
                continue
            cols = [c for c in storage.metadata.tables[table].columns if c.name != "credential_hash"]
            rows = [
                [row[i] for i in range(len(cols))]
                for row in conn.execute(select(*cols))
            ]
            rows.sort(key=lambda r: json.dumps(r, default=str))
            snapshot[table] = rows
    blob = json.dumps(snapshot, sort_keys=True, default=_bytes_safe)
    return hashlib.sha256(blob.encode()).hexdigest()


def _bytes_safe(value):
    if isinstance(value, bytes):
        return hashlib.sha256(value).hexdigest()
    return str(value)
