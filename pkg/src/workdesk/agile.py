"""Product backlog, sprint lifecycle, kanban board, tasks, and daily effort.

Day indexing is 1-based from the container start: day 1 is the sprint start
date for sprint tasks, or the workspace planned start for board tasks.
Board moves are guarded by a compare-and-set on the workspace board version,
so a stale client gets E-STALE-BOARD instead of silently clobbering state.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from datetime import date, datetime
from typing import Callable, Iterable

from sqlalchemy import delete, insert, select, update
from sqlalchemy.engine import Connection

from . import storage
from .authz import Scope, require
from .errors import (
    DomainError,
    E_BAD_DATES,
    E_DAY_OUT_OF_RANGE,
    E_DUP_ITEM_ID,
    E_DUP_TASK_ID,
    E_EMPTY_ENTRY,
    E_NEG_EFFORT,
    E_NO_ACTIVE_SPRINT,
    E_NO_SUCH_ITEM,
    E_NO_SUCH_SPRINT,
    E_NO_SUCH_TASK,
    E_NOT_ACTIVE,
    E_PROCESS_MISMATCH,
    E_SPRINT_ACTIVE,
    E_SPRINT_CLOSED,
    E_STALE_BOARD,
)
from .tenancy import Process, TenancyService


class ItemType(str, enum.Enum):
    FEATURE = "Feature"
    IMPROVEMENT = "Improvement"
    BUG = "Bug"
    ISSUE = "Issue"


class Priority(str, enum.Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"


class ItemStatus(str, enum.Enum):
    OPEN = "Open"
    IN_PROGRESS = "InProgress"
    DONE = "Done"


class TaskStatus(str, enum.Enum):
    TODO = "ToDo"
    IN_PROGRESS = "InProgress"
    DONE = "Done"


class SprintState(str, enum.Enum):
    ACTIVE = "Active"
    CLOSED = "Closed"


#: Task types counted as open issues by the sprint statistics.
ISSUE_TYPES = (ItemType.BUG, ItemType.ISSUE)


@dataclass(frozen=True)
class BacklogItem:
    ws_id: str
    item_id: str
    name: str
    description: str | None
    item_type: ItemType
    priority: Priority
    status: ItemStatus
    effort_estimate: float


@dataclass(frozen=True)
class Sprint:
    sprint_id: str
    ws_id: str
    name: str
    start: date
    end: date
    stakeholder_ids: tuple[str, ...]
    state: SprintState

    @property
    def day_count(self) -> int:
        return (self.end - self.start).days + 1


@dataclass(frozen=True)
class Task:
    gid: str
    ws_id: str
    task_id: str
    sprint_id: str | None
    name: str
    description: str | None
    task_type: ItemType
    priority: Priority
    assignees: tuple[str, ...]
    planned_effort: float
    status: TaskStatus
    source_item_id: str | None
    completed_at: datetime | None


@dataclass(frozen=True)
class EffortEntry:
    ws_id: str
    task_id: str
    day: int
    remaining: float | None
    actual: float | None


def _row_to_item(row) -> BacklogItem:
    return BacklogItem(
        ws_id=row.ws_id,
        item_id=row.item_id,
        name=row.name,
        description=row.description,
        item_type=ItemType(row.item_type),
        priority=Priority(row.priority),
        status=ItemStatus(row.status),
        effort_estimate=row.effort_estimate,
    )


def _row_to_sprint(row) -> Sprint:
    return Sprint(
        sprint_id=row.id,
        ws_id=row.ws_id,
        name=row.name,
        start=date.fromisoformat(row.start_date),
        end=date.fromisoformat(row.end_date),
        stakeholder_ids=tuple(json.loads(row.stakeholder_ids)),
        state=SprintState(row.state),
    )


def _row_to_task(row) -> Task:
    return Task(
        gid=row.gid,
        ws_id=row.ws_id,
        task_id=row.task_id,
        sprint_id=row.sprint_id,
        name=row.name,
        description=row.description,
        task_type=ItemType(row.task_type),
        priority=Priority(row.priority),
        assignees=tuple(json.loads(row.assignees)),
        planned_effort=row.planned_effort,
        status=TaskStatus(row.status),
        source_item_id=row.source_item_id,
        completed_at=datetime.fromisoformat(row.completed_at) if row.completed_at else None,
    )


def next_generated_id(existing: Iterable[str], prefix: str) -> str:
    """Next "<prefix>-n" with n past every numeric suffix already in use."""
    taken = set(existing)
    pattern = re.compile(rf"^{re.escape(prefix)}-(\d+)$")
    highest = 0
    for value in taken:
        match = pattern.match(value)
        if match:
            highest = max(highest, int(match.group(1)))
    n = highest + 1
    while f"{prefix}-{n}" in taken:
        n += 1
    return f"{prefix}-{n}"


class AgileService:
    def __init__(
        self,
        db: storage.Database,
        tenancy: TenancyService,
        clock: Callable[[], datetime],
    ):
        self.db = db
        self.tenancy = tenancy
        self.clock = clock

    # -- product backlog -----------------------------------------------------

    def add_backlog_item(
        self,
        actor: str,
        ws_id: str,
        name: str,
        item_type: ItemType = ItemType.FEATURE,
        priority: Priority = Priority.MEDIUM,
        description: str | None = None,
        effort_estimate: float = 0.0,
        status: ItemStatus = ItemStatus.OPEN,
        item_id: str | None = None,
    ) -> BacklogItem:
        if effort_estimate < 0:
            raise DomainError(E_NEG_EFFORT, "effort estimate must be >= 0")
        with self.db.transaction() as conn:
            self.tenancy.get_workspace(ws_id)
            require(conn, actor, Scope.ws(ws_id), "manage_backlog")
            existing_ids = {
                r.item_id
                for r in conn.execute(
                    select(storage.backlog_items.c.item_id).where(
                        storage.backlog_items.c.ws_id == ws_id
                    )
                )
            }
            if item_id is None:
                item_id = next_generated_id(existing_ids, "PBI")
            elif item_id in existing_ids:
                raise DomainError(E_DUP_ITEM_ID, f"item id {item_id} already exists")
            conn.execute(
                insert(storage.backlog_items).values(
                    ws_id=ws_id,
                    item_id=item_id,
                    name=name,
                    description=description,
                    item_type=ItemType(item_type).value,
                    priority=Priority(priority).value,
                    status=ItemStatus(status).value,
                    effort_estimate=float(effort_estimate),
                )
            )
            return self.get_item(ws_id, item_id)

    def get_item(self, ws_id: str, item_id: str) -> BacklogItem:
        with self.db.transaction() as conn:
            row = self._item_row(conn, ws_id, item_id)
            return _row_to_item(row)

    def backlog(self, ws_id: str) -> list[BacklogItem]:
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.backlog_items)
                .where(storage.backlog_items.c.ws_id == ws_id)
                .order_by(storage.backlog_items.c.item_id)
            ).all()
            return [_row_to_item(r) for r in rows]

    # -- sprints ---------------------------------------------------------------

    def create_sprint(
        self,
        actor: str,
        ws_id: str,
        name: str,
        start: date,
        end: date,
        stakeholder_ids: Iterable[str] = (),
    ) -> Sprint:
        if start > end:
            raise DomainError(E_BAD_DATES, "sprint start is after its end")
        with self.db.transaction() as conn:
            ws = self.tenancy.get_workspace(ws_id)
            require(conn, actor, Scope.ws(ws_id), "manage_sprints")
            if ws.process != Process.SCRUM:
                raise DomainError(
                    E_PROCESS_MISMATCH, "sprints exist only in Scrum workspaces"
                )
            if self._active_sprint_row(conn, ws_id) is not None:
                raise DomainError(E_SPRINT_ACTIVE, "workspace already has an active sprint")
            return self._insert_sprint(
                conn, ws_id, name, start, end, stakeholder_ids, SprintState.ACTIVE
            )

    def _insert_sprint(
        self,
        conn: Connection,
        ws_id: str,
        name: str,
        start: date,
        end: date,
        stakeholder_ids: Iterable[str],
        state: SprintState,
    ) -> Sprint:
        sprint_id = self.db.new_id(conn, "spr")
        seq = int(sprint_id.split("-")[-1])
        conn.execute(
            insert(storage.sprints).values(
                id=sprint_id,
                ws_id=ws_id,
                name=name,
                start_date=start.isoformat(),
                end_date=end.isoformat(),
                stakeholder_ids=json.dumps(sorted(set(stakeholder_ids))),
                state=state.value,
                seq=seq,
            )
        )
        return _row_to_sprint(self._sprint_row(conn, sprint_id))

    def close_sprint(self, actor: str, sprint_id: str) -> Sprint:
        with self.db.transaction() as conn:
            row = self._sprint_row(conn, sprint_id)
            require(conn, actor, Scope.ws(row.ws_id), "manage_sprints")
            if row.state != SprintState.ACTIVE.value:
                raise DomainError(E_NOT_ACTIVE, f"sprint {sprint_id} is not active")
            conn.execute(
                update(storage.sprints)
                .where(storage.sprints.c.id == sprint_id)
                .values(state=SprintState.CLOSED.value)
            )
            return _row_to_sprint(self._sprint_row(conn, sprint_id))

    def get_sprint(self, sprint_id: str) -> Sprint:
        with self.db.transaction() as conn:
            return _row_to_sprint(self._sprint_row(conn, sprint_id))

    def sprints_of(self, ws_id: str, state: SprintState | None = None) -> list[Sprint]:
        with self.db.transaction() as conn:
            query = select(storage.sprints).where(storage.sprints.c.ws_id == ws_id)
            if state is not None:
                query = query.where(storage.sprints.c.state == state.value)
            rows = conn.execute(query.order_by(storage.sprints.c.seq)).all()
            return [_row_to_sprint(r) for r in rows]

    def active_sprint(self, ws_id: str) -> Sprint | None:
        with self.db.transaction() as conn:
            row = self._active_sprint_row(conn, ws_id)
            return _row_to_sprint(row) if row is not None else None

    def set_process(self, actor: str, ws_id: str, process: Process) -> None:
        with self.db.transaction() as conn:
            ws = self.tenancy.get_workspace(ws_id)
            require(conn, actor, Scope.ws(ws_id), "set_process")
            process = Process(process)
            if ws.process == process:
                return  # idempotent
            if process == Process.KANBAN and self._active_sprint_row(conn, ws_id) is not None:
                raise DomainError(
                    E_SPRINT_ACTIVE, "close the active sprint before switching to Kanban"
                )
            conn.execute(
                update(storage.workspaces)
                .where(storage.workspaces.c.id == ws_id)
                .values(process=process.value)
            )

    # -- tasks -------------------------------------------------------------------

    def create_task(
        self,
        actor: str,
        ws_id: str,
        sprint_id: str | None = None,
        name: str | None = None,
        item_type: ItemType = ItemType.FEATURE,
        priority: Priority = Priority.MEDIUM,
        description: str | None = None,
        assignees: Iterable[str] = (),
        planned_effort: float = 0.0,
        source_item_id: str | None = None,
        task_id: str | None = None,
    ) -> Task:
        with self.db.transaction() as conn:
            ws = self.tenancy.get_workspace(ws_id)
            require(conn, actor, Scope.ws(ws_id), "manage_tasks")
            if ws.process == Process.SCRUM:
                if sprint_id is None:
                    active = self._active_sprint_row(conn, ws_id)
                    if active is None:
                        raise DomainError(
                            E_NO_ACTIVE_SPRINT, "create a sprint before adding tasks"
                        )
                    sprint_id = active.id
                else:
                    sprint = self._sprint_row(conn, sprint_id)
                    if sprint.ws_id != ws_id:
                        raise DomainError(E_NO_SUCH_SPRINT, f"no sprint {sprint_id} here")
                    if sprint.state != SprintState.ACTIVE.value:
                        raise DomainError(E_SPRINT_CLOSED, "sprint is closed")
            else:
                if sprint_id is not None:
                    raise DomainError(
                        E_PROCESS_MISMATCH, "kanban tasks live on the board, not in sprints"
                    )

            fields = {
                "name": name,
                "description": description,
                "item_type": ItemType(item_type),
                "priority": Priority(priority),
                "planned_effort": float(planned_effort),
            }
            if source_item_id is not None:
                item = _row_to_item(self._item_row(conn, ws_id, source_item_id))
                fields = {
                    "name": item.name,
                    "description": item.description,
                    "item_type": item.item_type,
                    "priority": item.priority,
                    "planned_effort": item.effort_estimate,
                }
                conn.execute(
                    update(storage.backlog_items)
                    .where(
                        storage.backlog_items.c.ws_id == ws_id,
                        storage.backlog_items.c.item_id == source_item_id,
                    )
                    .values(status=ItemStatus.IN_PROGRESS.value)
                )
            if fields["planned_effort"] < 0:
                raise DomainError(E_NEG_EFFORT, "planned effort must be >= 0")

            existing_ids = {
                r.task_id
                for r in conn.execute(
                    select(storage.tasks.c.task_id).where(storage.tasks.c.ws_id == ws_id)
                )
            }
            if task_id is None:
                task_id = next_generated_id(existing_ids, "T")
            elif task_id in existing_ids:
                raise DomainError(E_DUP_TASK_ID, f"task id {task_id} already exists")

            conn.execute(
                insert(storage.tasks).values(
                    gid=self.db.new_id(conn, "task"),
                    ws_id=ws_id,
                    task_id=task_id,
                    sprint_id=sprint_id,
                    name=fields["name"] or task_id,
                    description=fields["description"],
                    task_type=fields["item_type"].value,
                    priority=fields["priority"].value,
                    assignees=json.dumps(sorted(set(assignees))),
                    planned_effort=fields["planned_effort"],
                    status=TaskStatus.TODO.value,
                    source_item_id=source_item_id,
                    completed_at=None,
                )
            )
            return self.get_task(ws_id, task_id)

    def get_task(self, ws_id: str, task_id: str) -> Task:
        with self.db.transaction() as conn:
            return _row_to_task(self._task_row(conn, ws_id, task_id))

    def get_task_by_gid(self, gid: str) -> Task:
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.tasks).where(storage.tasks.c.gid == gid)
            ).first()
            if row is None:
                raise DomainError(E_NO_SUCH_TASK, f"no task {gid}")
            return _row_to_task(row)

    def tasks_of(self, ws_id: str, sprint_id: str | None = None, board_only: bool = False) -> list[Task]:
        with self.db.transaction() as conn:
            query = select(storage.tasks).where(storage.tasks.c.ws_id == ws_id)
            if sprint_id is not None:
                query = query.where(storage.tasks.c.sprint_id == sprint_id)
            elif board_only:
                query = query.where(storage.tasks.c.sprint_id.is_(None))
            rows = conn.execute(query.order_by(storage.tasks.c.task_id)).all()
            return [_row_to_task(r) for r in rows]

    def move_task(
        self, actor: str, ws_id: str, task_id: str, new_status: TaskStatus, expected_board_version: int
    ) -> tuple[Task, int]:
        """Compare-and-set move; a stale expected version changes nothing."""
        new_status = TaskStatus(new_status)
        with self.db.transaction() as conn:
            require(conn, actor, Scope.ws(ws_id), "manage_tasks")
            row = self._task_row(conn, ws_id, task_id)
            self._reject_closed_container(conn, row)
            result = conn.execute(
                update(storage.workspaces)
                .where(
                    storage.workspaces.c.id == ws_id,
                    storage.workspaces.c.board_version == expected_board_version,
                )
                .values(board_version=expected_board_version + 1)
            )
            if result.rowcount == 0:
                raise DomainError(
                    E_STALE_BOARD,
                    f"board changed (expected version {expected_board_version}); refetch and retry",
                )
            completed_at = (
                self.clock().isoformat() if new_status == TaskStatus.DONE else None
            )
            conn.execute(
                update(storage.tasks)
                .where(
                    storage.tasks.c.ws_id == ws_id,
                    storage.tasks.c.task_id == task_id,
                )
                .values(status=new_status.value, completed_at=completed_at)
            )
            if row.source_item_id:
                self._recompute_item_status(conn, ws_id, row.source_item_id)
            return self.get_task(ws_id, task_id), expected_board_version + 1

    def _recompute_item_status(self, conn: Connection, ws_id: str, item_id: str) -> None:
        # Item is Done only when it has tasks and every one of them is Done.
        statuses = [
            r.status
            for r in conn.execute(
                select(storage.tasks.c.status).where(
                    storage.tasks.c.ws_id == ws_id,
                    storage.tasks.c.source_item_id == item_id,
                )
            )
        ]
        if not statuses:
            return
        new_status = (
            ItemStatus.DONE
            if all(s == TaskStatus.DONE.value for s in statuses)
            else ItemStatus.IN_PROGRESS
        )
        conn.execute(
            update(storage.backlog_items)
            .where(
                storage.backlog_items.c.ws_id == ws_id,
                storage.backlog_items.c.item_id == item_id,
            )
            .values(status=new_status.value)
        )

    # -- effort ---------------------------------------------------------------------

    def record_effort(
        self,
        actor: str,
        ws_id: str,
        task_id: str,
        day: int,
        remaining: float | None = None,
        actual: float | None = None,
    ) -> EffortEntry:
        if remaining is None and actual is None:
            raise DomainError(E_EMPTY_ENTRY, "provide remaining and/or actual hours")
        if (remaining is not None and remaining < 0) or (actual is not None and actual < 0):
            raise DomainError(E_NEG_EFFORT, "effort hours must be >= 0")
        with self.db.transaction() as conn:
            require(conn, actor, Scope.ws(ws_id), "record_effort")
            row = self._task_row(conn, ws_id, task_id)
            self._reject_closed_container(conn, row)
            day_count = self._container_day_count(conn, row)
            if not 1 <= day <= day_count:
                raise DomainError(
                    E_DAY_OUT_OF_RANGE,
                    f"day {day} outside 1..{day_count} for this container",
                )
            self._upsert_effort(conn, ws_id, task_id, day, remaining, actual)
            return EffortEntry(ws_id, task_id, day, remaining, actual)

    def _upsert_effort(
        self,
        conn: Connection,
        ws_id: str,
        task_id: str,
        day: int,
        remaining: float | None,
        actual: float | None,
    ) -> None:
        conn.execute(
            delete(storage.effort_entries).where(
                storage.effort_entries.c.ws_id == ws_id,
                storage.effort_entries.c.task_id == task_id,
                storage.effort_entries.c.day == day,
            )
        )
        conn.execute(
            insert(storage.effort_entries).values(
                ws_id=ws_id, task_id=task_id, day=day, remaining=remaining, actual=actual
            )
        )

    def effort_for_task(self, ws_id: str, task_id: str) -> list[EffortEntry]:
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.effort_entries)
                .where(
                    storage.effort_entries.c.ws_id == ws_id,
                    storage.effort_entries.c.task_id == task_id,
                )
                .order_by(storage.effort_entries.c.day)
            ).all()
            return [EffortEntry(r.ws_id, r.task_id, r.day, r.remaining, r.actual) for r in rows]

    # -- shared row helpers -----------------------------------------------------------

    def _container_day_count(self, conn: Connection, task_row) -> int:
        if task_row.sprint_id is not None:
            sprint = _row_to_sprint(self._sprint_row(conn, task_row.sprint_id))
            return sprint.day_count
        ws = self.tenancy.get_workspace(task_row.ws_id)
        return (ws.planned_end - ws.planned_start).days + 1

    def _reject_closed_container(self, conn: Connection, task_row) -> None:
        if task_row.sprint_id is None:
            return
        sprint = self._sprint_row(conn, task_row.sprint_id)
        if sprint.state == SprintState.CLOSED.value:
            raise DomainError(E_SPRINT_CLOSED, "closed sprints are immutable")

    def _item_row(self, conn: Connection, ws_id: str, item_id: str):
        row = conn.execute(
            select(storage.backlog_items).where(
                storage.backlog_items.c.ws_id == ws_id,
                storage.backlog_items.c.item_id == item_id,
            )
        ).first()
        if row is None:
            raise DomainError(E_NO_SUCH_ITEM, f"no backlog item {item_id} in {ws_id}")
        return row

    def _task_row(self, conn: Connection, ws_id: str, task_id: str):
        row = conn.execute(
            select(storage.tasks).where(
                storage.tasks.c.ws_id == ws_id, storage.tasks.c.task_id == task_id
            )
        ).first()
        if row is None:
            raise DomainError(E_NO_SUCH_TASK, f"no task {task_id} in {ws_id}")
        return row

    def _sprint_row(self, conn: Connection, sprint_id: str):
        row = conn.execute(
            select(storage.sprints).where(storage.sprints.c.id == sprint_id)
        ).first()
        if row is None:
            raise DomainError(E_NO_SUCH_SPRINT, f"no sprint {sprint_id}")
        return row

    def _active_sprint_row(self, conn: Connection, ws_id: str):
        return conn.execute(
            select(storage.sprints).where(
                storage.sprints.c.ws_id == ws_id,
                storage.sprints.c.state == SprintState.ACTIVE.value,
            )
        ).first()
