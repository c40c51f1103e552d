"""Workbook import: parse, plan a create-vs-update merge, apply transactionally.

The interchange format is a fixed five-sheet workbook (docs/workbook-format.md):
ProjectInfo, Stakeholders, ProductBacklog, Tasks, Effort. Merging is keyed by
the element ids inside the workspace: a selected row whose id already exists
becomes an update with a field-level diff, an unknown id becomes a create, and
ids duplicated inside the selection become conflicts that block the commit.

Parsing is pure and total for non-key damage: malformed enum or numeric cells
degrade to defaults with a warning; rows missing their key (or carrying an
unusable measurement) are dropped with a warning; a sheet without its key
column is the one fatal case.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from typing import Any, Callable

from sqlalchemy import delete, insert, select, update
from sqlalchemy.engine import Connection

from . import events, storage, xlsxio
from .agile import ItemStatus, ItemType, Priority, SprintState, TaskStatus
from .authz import Scope, require
from .errors import (
    DomainError,
    E_BAD_SELECTION,
    E_HAS_CONFLICTS,
    E_MISSING_ID_COLUMN,
    E_NO_RECOGNIZED_SHEETS,
    E_NOT_XLSX,
    E_STALE_PLAN,
)
from .tenancy import Process, TenancyService, WorkspaceStatus

SHEET_PROJECT_INFO = "ProjectInfo"
SHEET_STAKEHOLDERS = "Stakeholders"
SHEET_BACKLOG = "ProductBacklog"
SHEET_TASKS = "Tasks"
SHEET_EFFORT = "Effort"

CANONICAL_SHEETS = (
    SHEET_PROJECT_INFO,
    SHEET_STAKEHOLDERS,
    SHEET_BACKLOG,
    SHEET_TASKS,
    SHEET_EFFORT,
)

HEADERS = {
    SHEET_PROJECT_INFO: ["Key", "Value"],
    SHEET_STAKEHOLDERS: ["ID", "Name", "Email", "Role"],
    SHEET_BACKLOG: ["ID", "Name", "Description", "Type", "Priority", "Status", "Effort"],
    SHEET_TASKS: [
        "ID",
        "Sprint",
        "Name",
        "Description",
        "Type",
        "Priority",
        "AssignedTo",
        "PlannedEffort",
        "Status",
    ],
    SHEET_EFFORT: ["TaskID", "Day", "Remaining", "Actual"],
}

KEY_COLUMN = {
    SHEET_PROJECT_INFO: "Key",
    SHEET_STAKEHOLDERS: "ID",
    SHEET_BACKLOG: "ID",
    SHEET_TASKS: "ID",
    SHEET_EFFORT: "TaskID",
}

PROJECT_INFO_KEYS = {
    "Name": "name",
    "Status": "status",
    "Process": "process",
    "Benefits": "benefits",
    "SuccessCriteria": "success_criteria",
    "PlannedCost": "planned_cost",
    "CurrentCost": "current_cost",
    "PlannedStart": "planned_start",
    "PlannedEnd": "planned_end",
}

DEFAULT_SPRINT_DAYS = 14

Source = tuple[str, int]  # (sheet, 1-based row number)


class ImportScope(str, enum.Enum):
    ALL = "All"
    PRODUCT_BACKLOG = "ProductBacklog"
    TASKS = "Tasks"
    STAKEHOLDERS = "Stakeholders"


@dataclass(frozen=True)
class ParseWarning:
    sheet: str
    row: int
    message: str


@dataclass(frozen=True)
class ProjectInfoRow:
    key: str
    value: Any  # normalized: str, float, or ISO date string
    source: Source


@dataclass(frozen=True)
class StakeholderRow:
    stakeholder_id: str
    name: str
    email: str
    role: str
    source: Source


@dataclass(frozen=True)
class BacklogRow:
    item_id: str
    name: str
    description: str | None
    item_type: str
    priority: str
    status: str
    effort: float
    source: Source


@dataclass(frozen=True)
class TaskRow:
    task_id: str
    sprint_name: str | None
    name: str
    description: str | None
    task_type: str
    priority: str
    assignees: tuple[str, ...]
    planned_effort: float
    status: str
    source: Source


@dataclass(frozen=True)
class EffortRow:
    task_id: str
    day: int
    remaining: float | None
    actual: float | None
    source: Source


@dataclass(frozen=True)
class WorkbookModel:
    project_info: tuple[ProjectInfoRow, ...]
    stakeholders: tuple[StakeholderRow, ...]
    backlog_items: tuple[BacklogRow, ...]
    tasks: tuple[TaskRow, ...]
    effort_entries: tuple[EffortRow, ...]
    warnings: tuple[ParseWarning, ...]

    def all_sources(self) -> set[Source]:
        rows: list[Source] = []
        for group in (
            self.project_info,
            self.stakeholders,
            self.backlog_items,
            self.tasks,
            self.effort_entries,
        ):
            rows.extend(r.source for r in group)
        return set(rows)


@dataclass(frozen=True)
class ImportSelection:
    scope: ImportScope = ImportScope.ALL
    row_filter: frozenset[Source] | None = None


@dataclass(frozen=True)
class FieldChange:
    field: str
    old: Any
    new: Any


@dataclass(frozen=True)
class CreateAction:
    kind: str  # stakeholder | backlog_item | task | effort
    entity_id: str
    fields: dict
    source: Source


@dataclass(frozen=True)
class UpdateAction:
    kind: str  # stakeholder | backlog_item | task | effort | workspace
    entity_id: str
    changes: tuple[FieldChange, ...]
    source: Source


@dataclass(frozen=True)
class Conflict:
    kind: str
    entity_id: str
    message: str
    sources: tuple[Source, ...]


@dataclass(frozen=True)
class SkippedRow:
    source: Source
    reason: str


@dataclass(frozen=True)
class ImportPlan:
    ws_id: str
    scope: ImportScope
    creates: tuple[CreateAction, ...]
    updates: tuple[UpdateAction, ...]
    conflicts: tuple[Conflict, ...]
    skipped: tuple[SkippedRow, ...]
    state_hash: str

    def to_dict(self) -> dict:
        return {
            "ws_id": self.ws_id,
            "scope": self.scope.value,
            "creates": [
                {
                    "kind": a.kind,
                    "entity_id": a.entity_id,
                    "fields": a.fields,
                    "source": list(a.source),
                }
                for a in self.creates
            ],
            "updates": [
                {
                    "kind": a.kind,
                    "entity_id": a.entity_id,
                    "changes": [
                        {"field": c.field, "old": c.old, "new": c.new} for c in a.changes
                    ],
                    "source": list(a.source),
                }
                for a in self.updates
            ],
            "conflicts": [
                {
                    "kind": c.kind,
                    "entity_id": c.entity_id,
                    "message": c.message,
                    "sources": [list(s) for s in c.sources],
                }
                for c in self.conflicts
            ],
            "skipped": [
                {"source": list(s.source), "reason": s.reason} for s in self.skipped
            ],
            "state_hash": self.state_hash,
        }

    @staticmethod
    def from_dict(payload: dict) -> "ImportPlan":
        return ImportPlan(
            ws_id=payload["ws_id"],
            scope=ImportScope(payload["scope"]),
            creates=tuple(
                CreateAction(
                    a["kind"], a["entity_id"], a["fields"], _source(a["source"])
                )
                for a in payload.get("creates", [])
            ),
            updates=tuple(
                UpdateAction(
                    a["kind"],
                    a["entity_id"],
                    tuple(
                        FieldChange(c["field"], c["old"], c["new"])
                        for c in a.get("changes", [])
                    ),
                    _source(a["source"]),
                )
                for a in payload.get("updates", [])
            ),
            conflicts=tuple(
                Conflict(
                    c["kind"],
                    c["entity_id"],
                    c["message"],
                    tuple(_source(s) for s in c.get("sources", [])),
                )
                for c in payload.get("conflicts", [])
            ),
            skipped=tuple(
                SkippedRow(_source(s["source"]), s["reason"])
                for s in payload.get("skipped", [])
            ),
            state_hash=payload["state_hash"],
        )


def _source(value) -> Source:
    return (str(value[0]), int(value[1]))


@dataclass(frozen=True)
class ImportReport:
    created: dict[str, int]
    updated: dict[str, int]
    skipped: int
    applied_at: datetime

    def to_dict(self) -> dict:
        return {
            "created": dict(self.created),
            "updated": dict(self.updated),
            "skipped": self.skipped,
            "applied_at": self.applied_at.isoformat(),
            "created_total": sum(self.created.values()),
            "updated_total": sum(self.updated.values()),
        }


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def parse_workbook(data: bytes) -> WorkbookModel:
    try:
        sheets = xlsxio.read_workbook(data)
    except xlsxio.NotXlsx as exc:
        raise DomainError(E_NOT_XLSX, f"not a readable xlsx workbook: {exc}")

    recognized = [name for name in CANONICAL_SHEETS if name in sheets]
    if not recognized:
        raise DomainError(
            E_NO_RECOGNIZED_SHEETS,
            f"no recognized sheets; expected any of {', '.join(CANONICAL_SHEETS)}",
        )

    warnings: list[ParseWarning] = []
    for name in sorted(set(sheets) - set(CANONICAL_SHEETS)):
        warnings.append(ParseWarning(name, 0, "unrecognized sheet ignored"))

    parser = _Parser(warnings)
    project_info: list[ProjectInfoRow] = []
    stakeholder_rows: list[StakeholderRow] = []
    backlog_rows: list[BacklogRow] = []
    task_rows: list[TaskRow] = []
    effort_rows: list[EffortRow] = []

    for name in recognized:
        rows = sheets[name]
        columns = parser.header_map(name, rows)
        for idx, row in enumerate(rows[1:], start=2):
            if all(cell is None or str(cell).strip() == "" for cell in row):
                continue
            source = (name, idx)
            if name == SHEET_PROJECT_INFO:
                parsed = parser.project_info_row(columns, row, source)
                if parsed:
                    project_info.append(parsed)
            elif name == SHEET_STAKEHOLDERS:
                parsed = parser.stakeholder_row(columns, row, source)
                if parsed:
                    stakeholder_rows.append(parsed)
            elif name == SHEET_BACKLOG:
                parsed = parser.backlog_row(columns, row, source)
                if parsed:
                    backlog_rows.append(parsed)
            elif name == SHEET_TASKS:
                parsed = parser.task_row(columns, row, source)
                if parsed:
                    task_rows.append(parsed)
            elif name == SHEET_EFFORT:
                parsed = parser.effort_row(columns, row, source)
                if parsed:
                    effort_rows.append(parsed)

    return WorkbookModel(
        project_info=tuple(project_info),
        stakeholders=tuple(stakeholder_rows),
        backlog_items=tuple(backlog_rows),
        tasks=tuple(task_rows),
        effort_entries=tuple(effort_rows),
        warnings=tuple(warnings),
    )


class _Parser:
    def __init__(self, warnings: list[ParseWarning]):
        self.warnings = warnings

    def warn(self, source: Source, message: str) -> None:
        self.warnings.append(ParseWarning(source[0], source[1], message))

    def header_map(self, sheet: str, rows: list[list]) -> dict[str, int]:
        header = rows[0] if rows else []
        names = [str(c).strip() if c is not None else "" for c in header]
        columns = {name: i for i, name in enumerate(names) if name}
        key = KEY_COLUMN[sheet]
        if key not in columns:
            raise DomainError(
                E_MISSING_ID_COLUMN,
                f"sheet {sheet!r} header row 1 is missing required column {key!r}",
            )
        for expected in HEADERS[sheet]:
            if expected not in columns:
                self.warn((sheet, 1), f"column {expected!r} missing; values default")
        for extra in sorted(set(columns) - set(HEADERS[sheet])):
            self.warn((sheet, 1), f"unrecognized column {extra!r} ignored")
        return columns

    # -- cell coercion ------------------------------------------------------

    @staticmethod
    def _cell(columns: dict[str, int], row: list, name: str):
        i = columns.get(name)
        if i is None or i >= len(row):
            return None
        return row[i]

    @staticmethod
    def _text(value) -> str | None:
        if value is None:
            return None
        if isinstance(value, float):
            text = str(int(value)) if value.is_integer() else repr(value)
        else:
            text = str(value)
        text = text.strip()
        return text or None

    def _enum(self, source: Source, column: str, value, enum_cls, default) -> str:
        text = self._text(value)
        if text is None:
            return default.value
        try:
            return enum_cls(text).value
        except ValueError:
            self.warn(
                source,
                f"{column} value {text!r} not one of "
                f"{'/'.join(e.value for e in enum_cls)}; defaulted to {default.value}",
            )
            return default.value

    def _hours(self, source: Source, column: str, value, default: float = 0.0) -> float:
        if value is None or (isinstance(value, str) and not value.strip()):
            return default
        try:
            number = float(value)
        except (TypeError, ValueError):
            self.warn(source, f"{column} value {value!r} is not a number; defaulted to {default}")
            return default
        if number < 0:
            self.warn(source, f"{column} value {number} is negative; defaulted to {default}")
            return default
        return number

    # -- per-sheet row parsers ---------------------------------------------

    def project_info_row(self, columns, row, source) -> ProjectInfoRow | None:
        key = self._text(self._cell(columns, row, "Key"))
        raw = self._cell(columns, row, "Value")
        if key is None:
            self.warn(source, "blank Key; row dropped")
            return None
        if key not in PROJECT_INFO_KEYS:
            self.warn(source, f"unknown ProjectInfo key {key!r}; row dropped")
            return None
        value: Any
        if key in ("PlannedCost", "CurrentCost"):
            try:
                value = float(raw)
            except (TypeError, ValueError):
                self.warn(source, f"{key} value {raw!r} is not a number; row dropped")
                return None
            if value < 0:
                self.warn(source, f"{key} value {value} is negative; row dropped")
                return None
        elif key in ("PlannedStart", "PlannedEnd"):
            text = self._text(raw)
            try:
                value = date.fromisoformat(text or "")
            except ValueError:
                self.warn(source, f"{key} value {raw!r} is not an ISO date; row dropped")
                return None
            value = value.isoformat()
        elif key == "Status":
            text = self._text(raw)
            try:
                value = WorkspaceStatus(text or "").value
            except ValueError:
                self.warn(source, f"Status value {raw!r} invalid; row dropped")
                return None
        elif key == "Process":
            text = self._text(raw)
            try:
                value = Process(text or "").value
            except ValueError:
                self.warn(source, f"Process value {raw!r} invalid; row dropped")
                return None
        else:
            value = self._text(raw) or ""
            if key == "Name" and not value:
                self.warn(source, "Name value is blank; row dropped")
                return None
        return ProjectInfoRow(key, value, source)

    def stakeholder_row(self, columns, row, source) -> StakeholderRow | None:
        sid = self._text(self._cell(columns, row, "ID"))
        if sid is None:
            self.warn(source, "blank ID; row dropped")
            return None
        return StakeholderRow(
            stakeholder_id=sid,
            name=self._text(self._cell(columns, row, "Name")) or "",
            email=self._text(self._cell(columns, row, "Email")) or "",
            role=self._text(self._cell(columns, row, "Role")) or "",
            source=source,
        )

    def backlog_row(self, columns, row, source) -> BacklogRow | None:
        item_id = self._text(self._cell(columns, row, "ID"))
        if item_id is None:
            self.warn(source, "blank ID; row dropped")
            return None
        name = self._text(self._cell(columns, row, "Name"))
        if name is None:
            self.warn(source, "blank Name; defaulted to the ID")
            name = item_id
        return BacklogRow(
            item_id=item_id,
            name=name,
            description=self._text(self._cell(columns, row, "Description")),
            item_type=self._enum(
                source, "Type", self._cell(columns, row, "Type"), ItemType, ItemType.FEATURE
            ),
            priority=self._enum(
                source, "Priority", self._cell(columns, row, "Priority"), Priority, Priority.MEDIUM
            ),
            status=self._enum(
                source, "Status", self._cell(columns, row, "Status"), ItemStatus, ItemStatus.OPEN
            ),
            effort=self._hours(source, "Effort", self._cell(columns, row, "Effort")),
            source=source,
        )

    def task_row(self, columns, row, source) -> TaskRow | None:
        task_id = self._text(self._cell(columns, row, "ID"))
        if task_id is None:
            self.warn(source, "blank ID; row dropped")
            return None
        name = self._text(self._cell(columns, row, "Name"))
        if name is None:
            self.warn(source, "blank Name; defaulted to the ID")
            name = task_id
        assigned = self._text(self._cell(columns, row, "AssignedTo")) or ""
        assignees = tuple(part.strip() for part in assigned.split(";") if part.strip())
        return TaskRow(
            task_id=task_id,
            sprint_name=self._text(self._cell(columns, row, "Sprint")),
            name=name,
            description=self._text(self._cell(columns, row, "Description")),
            task_type=self._enum(
                source, "Type", self._cell(columns, row, "Type"), ItemType, ItemType.FEATURE
            ),
            priority=self._enum(
                source, "Priority", self._cell(columns, row, "Priority"), Priority, Priority.MEDIUM
            ),
            assignees=assignees,
            planned_effort=self._hours(
                source, "PlannedEffort", self._cell(columns, row, "PlannedEffort")
            ),
            status=self._enum(
                source, "Status", self._cell(columns, row, "Status"), TaskStatus, TaskStatus.TODO
            ),
            source=source,
        )

    def effort_row(self, columns, row, source) -> EffortRow | None:
        task_id = self._text(self._cell(columns, row, "TaskID"))
        if task_id is None:
            self.warn(source, "blank TaskID; row dropped")
            return None
        raw_day = self._cell(columns, row, "Day")
        try:
            day = int(float(raw_day))
            if day < 1 or float(raw_day) != day:
                raise ValueError
        except (TypeError, ValueError):
            self.warn(source, f"Day value {raw_day!r} is not an integer >= 1; row dropped")
            return None
        remaining = self._optional_hours(source, "Remaining", self._cell(columns, row, "Remaining"))
        actual = self._optional_hours(source, "Actual", self._cell(columns, row, "Actual"))
        if remaining is _BAD or actual is _BAD:
            return None
        if remaining is None and actual is None:
            self.warn(source, "both Remaining and Actual blank; row dropped")
            return None
        return EffortRow(task_id, day, remaining, actual, source)

    def _optional_hours(self, source: Source, column: str, value):
        if value is None or (isinstance(value, str) and not value.strip()):
            return None
        try:
            number = float(value)
        except (TypeError, ValueError):
            self.warn(source, f"{column} value {value!r} is not a number; row dropped")
            return _BAD
        if number < 0:
            self.warn(source, f"{column} value {number} is negative; row dropped")
            return _BAD
        return number


_BAD = object()


# --------------------------------------------------------------------------
# Planning and committing
# --------------------------------------------------------------------------


class ImportService:
    def __init__(
        self,
        db: storage.Database,
        tenancy: TenancyService,
        bus: events.EventBus,
        clock: Callable[[], datetime],
    ):
        self.db = db
        self.tenancy = tenancy
        self.bus = bus
        self.clock = clock

    # -- plan -----------------------------------------------------------------

    def plan_import(
        self, ws_id: str, model: WorkbookModel, selection: ImportSelection
    ) -> ImportPlan:
        with self.db.transaction() as conn:
            ws = self.tenancy.get_workspace(ws_id)
            selected = self._select(model, selection)
            snapshot = _Snapshot.load(conn, ws_id)

            creates: list[CreateAction] = []
            updates: list[UpdateAction] = []
            conflicts: list[Conflict] = []
            skipped: list[SkippedRow] = []

            dup_conflicts = self._duplicate_ids(selected)
            conflicts.extend(dup_conflicts)
            dup_sources = {s for c in dup_conflicts for s in c.sources}

            planned_task_sprints: dict[str, str | None] = {}

            for row in selected["stakeholders"]:
                if row.source in dup_sources:
                    continue
                existing = snapshot.stakeholders.get(row.stakeholder_id)
                fields = {
                    "name": row.name,
                    "email": row.email,
                    "role": row.role,
                }
                if existing is None:
                    creates.append(
                        CreateAction("stakeholder", row.stakeholder_id, fields, row.source)
                    )
                else:
                    changes = _diff(existing, fields)
                    updates.append(
                        UpdateAction("stakeholder", row.stakeholder_id, changes, row.source)
                    )

            for row in selected["backlog_items"]:
                if row.source in dup_sources:
                    continue
                existing = snapshot.backlog_items.get(row.item_id)
                fields = {
                    "name": row.name,
                    "description": row.description,
                    "item_type": row.item_type,
                    "priority": row.priority,
                    "status": row.status,
                    "effort_estimate": row.effort,
                }
                if existing is None:
                    creates.append(CreateAction("backlog_item", row.item_id, fields, row.source))
                else:
                    updates.append(
                        UpdateAction("backlog_item", row.item_id, _diff(existing, fields), row.source)
                    )

            for row in selected["tasks"]:
                if row.source in dup_sources:
                    continue
                if ws.process == Process.SCRUM and row.sprint_name is None:
                    conflicts.append(
                        Conflict(
                            "task",
                            row.task_id,
                            "task row has no Sprint but the workspace runs Scrum",
                            (row.source,),
                        )
                    )
                    continue
                planned_task_sprints[row.task_id] = row.sprint_name
                existing = snapshot.tasks.get(row.task_id)
                fields = {
                    "sprint": row.sprint_name,
                    "name": row.name,
                    "description": row.description,
                    "task_type": row.task_type,
                    "priority": row.priority,
                    "assignees": list(row.assignees),
                    "planned_effort": row.planned_effort,
                    "status": row.status,
                }
                if existing is None:
                    creates.append(CreateAction("task", row.task_id, fields, row.source))
                else:
                    updates.append(
                        UpdateAction("task", row.task_id, _diff(existing, fields), row.source)
                    )

            known_tasks = set(snapshot.tasks) | set(planned_task_sprints)
            for row in selected["effort_entries"]:
                if row.source in dup_sources:
                    continue
                if row.task_id not in known_tasks:
                    conflicts.append(
                        Conflict(
                            "effort",
                            f"{row.task_id}@{row.day}",
                            f"effort row references unknown task {row.task_id!r}",
                            (row.source,),
                        )
                    )
                    continue
                day_count = self._planned_day_count(
                    ws, snapshot, planned_task_sprints, row.task_id
                )
                if day_count is not None and row.day > day_count:
                    conflicts.append(
                        Conflict(
                            "effort",
                            f"{row.task_id}@{row.day}",
                            f"day {row.day} outside 1..{day_count} for task {row.task_id!r}",
                            (row.source,),
                        )
                    )
                    continue
                key = (row.task_id, row.day)
                existing = snapshot.effort.get(key)
                fields = {"remaining": row.remaining, "actual": row.actual}
                entity_id = f"{row.task_id}@{row.day}"
                if existing is None:
                    creates.append(CreateAction("effort", entity_id, fields, row.source))
                else:
                    updates.append(
                        UpdateAction("effort", entity_id, _diff(existing, fields), row.source)
                    )

            for row in selected["project_info"]:
                field_name = PROJECT_INFO_KEYS[row.key]
                old = snapshot.workspace_fields[field_name]
                changes = (
                    (FieldChange(field_name, old, row.value),) if old != row.value else ()
                )
                updates.append(UpdateAction("workspace", row.key, changes, row.source))

            return ImportPlan(
                ws_id=ws_id,
                scope=selection.scope,
                creates=tuple(creates),
                updates=tuple(updates),
                conflicts=tuple(conflicts),
                skipped=tuple(skipped),
                state_hash=snapshot.state_hash,
            )

    def _select(self, model: WorkbookModel, selection: ImportSelection) -> dict[str, list]:
        if selection.row_filter is not None:
            known = model.all_sources()
            missing = set(selection.row_filter) - known
            if missing:
                raise DomainError(
                    E_BAD_SELECTION,
                    f"row filter references rows not in the parsed workbook: {sorted(missing)}",
                )

        scope = selection.scope
        groups: dict[str, list] = {
            "project_info": [],
            "stakeholders": [],
            "backlog_items": [],
            "tasks": [],
            "effort_entries": [],
        }
        if scope == ImportScope.ALL:
            groups["project_info"] = list(model.project_info)
            groups["stakeholders"] = list(model.stakeholders)
            groups["backlog_items"] = list(model.backlog_items)
            groups["tasks"] = list(model.tasks)
            groups["effort_entries"] = list(model.effort_entries)
        elif scope == ImportScope.PRODUCT_BACKLOG:
            groups["backlog_items"] = list(model.backlog_items)
        elif scope == ImportScope.TASKS:
            groups["tasks"] = list(model.tasks)
            groups["effort_entries"] = list(model.effort_entries)
        elif scope == ImportScope.STAKEHOLDERS:
            groups["stakeholders"] = list(model.stakeholders)

        if selection.row_filter is not None:
            chosen = set(selection.row_filter)
            for key in groups:
                groups[key] = [r for r in groups[key] if r.source in chosen]
        return groups

    @staticmethod
    def _duplicate_ids(selected: dict[str, list]) -> list[Conflict]:
        conflicts = []
        keyed = {
            "stakeholder": [(r.stakeholder_id, r.source) for r in selected["stakeholders"]],
            "backlog_item": [(r.item_id, r.source) for r in selected["backlog_items"]],
            "task": [(r.task_id, r.source) for r in selected["tasks"]],
            "effort": [
                (f"{r.task_id}@{r.day}", r.source) for r in selected["effort_entries"]
            ],
        }
        for kind, pairs in keyed.items():
            by_id: dict[str, list[Source]] = {}
            for entity_id, source in pairs:
                by_id.setdefault(entity_id, []).append(source)
            for entity_id, sources in by_id.items():
                if len(sources) > 1:
                    conflicts.append(
                        Conflict(
                            kind,
                            entity_id,
                            f"id {entity_id!r} appears in {len(sources)} selected rows",
                            tuple(sources),
                        )
                    )
        return conflicts

    def _planned_day_count(
        self,
        ws,
        snapshot: "_Snapshot",
        planned_task_sprints: dict[str, str | None],
        task_id: str,
    ) -> int | None:
        """Day-grid size for the task after this import; None = sized to fit."""
        if task_id in planned_task_sprints:
            sprint_name = planned_task_sprints[task_id]
        else:
            sprint_name = snapshot.task_sprint_names.get(task_id)
        if sprint_name is None:
            start = date.fromisoformat(snapshot.workspace_fields["planned_start"])
            end = date.fromisoformat(snapshot.workspace_fields["planned_end"])
            return (end - start).days + 1
        existing = snapshot.sprints_by_name.get(sprint_name)
        if existing is None:
            return None  # sprint will be auto-created around the observed days
        return existing["day_count"]

    # -- commit -----------------------------------------------------------------

    def commit_import(self, actor: str, ws_id: str, plan: ImportPlan) -> ImportReport:
        with self.db.transaction() as conn:
            ws = self.tenancy.get_workspace(ws_id)
            require(conn, actor, Scope.ws(ws_id), "import_data")
            if plan.conflicts:
                raise DomainError(
                    E_HAS_CONFLICTS,
                    f"plan has {len(plan.conflicts)} conflicts; resolve them and re-plan",
                )
            current_hash = storage.workspace_state_hash(conn, ws_id)
            if current_hash != plan.state_hash:
                raise DomainError(
                    E_STALE_PLAN, "workspace changed since the plan was computed; re-plan"
                )

            created: dict[str, int] = {}
            updated: dict[str, int] = {}

            self._apply_workspace_updates(conn, ws_id, plan, updated)
            self._apply_stakeholders(conn, ws_id, plan, created, updated)
            self._apply_backlog(conn, ws_id, plan, created, updated)
            sprint_ids = self._ensure_sprints(conn, ws, plan, created)
            self._apply_tasks(conn, ws, plan, sprint_ids, created, updated)
            self._apply_effort(conn, ws_id, plan, created, updated)

            report = ImportReport(
                created=created,
                updated=updated,
                skipped=len(plan.skipped),
                applied_at=self.clock(),
            )
            self.bus.emit(
                conn,
                events.IMPORT_COMPLETED,
                {
                    "ws_id": ws_id,
                    "actor": actor,
                    "created": created,
                    "updated": updated,
                    "skipped": len(plan.skipped),
                },
                self.clock(),
            )
            return report

    def _apply_workspace_updates(self, conn, ws_id, plan, updated) -> None:
        values: dict[str, Any] = {}
        for action in plan.updates:
            if action.kind != "workspace":
                continue
            updated["workspace"] = updated.get("workspace", 0) + 1
            for change in action.changes:
                values[change.field] = change.new
        if values:
            conn.execute(
                update(storage.workspaces).where(storage.workspaces.c.id == ws_id).values(**values)
            )

    def _apply_stakeholders(self, conn, ws_id, plan, created, updated) -> None:
        for action in plan.creates:
            if action.kind != "stakeholder":
                continue
            conn.execute(
                insert(storage.stakeholders).values(
                    ws_id=ws_id,
                    stakeholder_id=action.entity_id,
                    name=action.fields["name"],
                    email=action.fields["email"],
                    role=action.fields["role"],
                )
            )
            created["stakeholder"] = created.get("stakeholder", 0) + 1
        for action in plan.updates:
            if action.kind != "stakeholder":
                continue
            updated["stakeholder"] = updated.get("stakeholder", 0) + 1
            if action.changes:
                conn.execute(
                    update(storage.stakeholders)
                    .where(
                        storage.stakeholders.c.ws_id == ws_id,
                        storage.stakeholders.c.stakeholder_id == action.entity_id,
                    )
                    .values(**{c.field: c.new for c in action.changes})
                )

    def _apply_backlog(self, conn, ws_id, plan, created, updated) -> None:
        for action in plan.creates:
            if action.kind != "backlog_item":
                continue
            conn.execute(
                insert(storage.backlog_items).values(
                    ws_id=ws_id,
                    item_id=action.entity_id,
                    name=action.fields["name"],
                    description=action.fields["description"],
                    item_type=action.fields["item_type"],
                    priority=action.fields["priority"],
                    status=action.fields["status"],
                    effort_estimate=action.fields["effort_estimate"],
                )
            )
            created["backlog_item"] = created.get("backlog_item", 0) + 1
        for action in plan.updates:
            if action.kind != "backlog_item":
                continue
            updated["backlog_item"] = updated.get("backlog_item", 0) + 1
            if action.changes:
                conn.execute(
                    update(storage.backlog_items)
                    .where(
                        storage.backlog_items.c.ws_id == ws_id,
                        storage.backlog_items.c.item_id == action.entity_id,
                    )
                    .values(**{c.field: c.new for c in action.changes})
                )

    def _ensure_sprints(self, conn, ws, plan, created) -> dict[str, str]:
        """Resolve sprint names to ids, creating missing ones as Closed history.

        A created sprint's day grid is anchored at the workspace planned start
        and sized to the largest effort day observed for its tasks (existing
        entries included), defaulting to a two-week window.
        """
        sprint_rows = conn.execute(
            select(storage.sprints).where(storage.sprints.c.ws_id == ws.ws_id)
        ).all()
        by_name: dict[str, str] = {}
        for row in sorted(sprint_rows, key=lambda r: r.seq):
            by_name.setdefault(row.name, row.id)

        wanted: dict[str, set[str]] = {}  # sprint name -> task ids headed there
        for action in plan.creates:
            if action.kind == "task" and action.fields["sprint"] is not None:
                wanted.setdefault(action.fields["sprint"], set()).add(action.entity_id)
        for action in plan.updates:
            if action.kind != "task":
                continue
            for change in action.changes:
                if change.field == "sprint" and change.new is not None:
                    wanted.setdefault(change.new, set()).add(action.entity_id)

        imported_days: dict[str, list[int]] = {}
        for action in plan.creates:
            if action.kind == "effort":
                task_id, day = action.entity_id.rsplit("@", 1)
                imported_days.setdefault(task_id, []).append(int(day))

        for name in sorted(wanted):
            if name in by_name:
                continue
            days: list[int] = []
            for task_id in wanted[name]:
                days.extend(imported_days.get(task_id, []))
                existing = conn.execute(
                    select(storage.effort_entries.c.day).where(
                        storage.effort_entries.c.ws_id == ws.ws_id,
                        storage.effort_entries.c.task_id == task_id,
                    )
                ).all()
                days.extend(r.day for r in existing)
            span = max(days) if days else DEFAULT_SPRINT_DAYS
            sprint_id = self.db.new_id(conn, "spr")
            conn.execute(
                insert(storage.sprints).values(
                    id=sprint_id,
                    ws_id=ws.ws_id,
                    name=name,
                    start_date=ws.planned_start.isoformat(),
                    end_date=(ws.planned_start + _days(span - 1)).isoformat(),
                    stakeholder_ids="[]",
                    state=SprintState.CLOSED.value,
                    seq=int(sprint_id.split("-")[-1]),
                )
            )
            by_name[name] = sprint_id
            created["sprint"] = created.get("sprint", 0) + 1
        return by_name

    def _apply_tasks(self, conn, ws, plan, sprint_ids, created, updated) -> None:
        for action in plan.creates:
            if action.kind != "task":
                continue
            f = action.fields
            sprint_id = sprint_ids.get(f["sprint"]) if f["sprint"] else None
            conn.execute(
                insert(storage.tasks).values(
                    gid=self.db.new_id(conn, "task"),
                    ws_id=ws.ws_id,
                    task_id=action.entity_id,
                    sprint_id=sprint_id,
                    name=f["name"],
                    description=f["description"],
                    task_type=f["task_type"],
                    priority=f["priority"],
                    assignees=json.dumps(sorted(set(f["assignees"]))),
                    planned_effort=f["planned_effort"],
                    status=f["status"],
                    source_item_id=None,
                    completed_at=(
                        self._imported_completion(conn, ws, sprint_id, action.entity_id)
                        if f["status"] == TaskStatus.DONE.value
                        else None
                    ),
                )
            )
            created["task"] = created.get("task", 0) + 1
        for action in plan.updates:
            if action.kind != "task":
                continue
            updated["task"] = updated.get("task", 0) + 1
            if not action.changes:
                continue
            values: dict[str, Any] = {}
            for change in action.changes:
                if change.field == "sprint":
                    values["sprint_id"] = sprint_ids.get(change.new) if change.new else None
                elif change.field == "assignees":
                    values["assignees"] = json.dumps(sorted(set(change.new)))
                else:
                    values[change.field] = change.new
            if "status" in values:
                if values["status"] == TaskStatus.DONE.value:
                    sprint_id = values.get(
                        "sprint_id",
                        conn.execute(
                            select(storage.tasks.c.sprint_id).where(
                                storage.tasks.c.ws_id == ws.ws_id,
                                storage.tasks.c.task_id == action.entity_id,
                            )
                        ).scalar(),
                    )
                    values["completed_at"] = self._imported_completion(
                        conn, ws, sprint_id, action.entity_id
                    )
                else:
                    values["completed_at"] = None
            conn.execute(
                update(storage.tasks)
                .where(
                    storage.tasks.c.ws_id == ws.ws_id,
                    storage.tasks.c.task_id == action.entity_id,
                )
                .values(**values)
            )

    def _imported_completion(self, conn, ws, sprint_id: str | None, task_id: str) -> str:
        """Workbook rows carry no completion timestamp; derive a stable one."""
        if sprint_id is not None:
            row = conn.execute(
                select(storage.sprints.c.end_date).where(storage.sprints.c.id == sprint_id)
            ).first()
            if row is not None:
                end = date.fromisoformat(row.end_date)
                return datetime.combine(end, time(12, 0), timezone.utc).isoformat()
        days = [
            r.day
            for r in conn.execute(
                select(storage.effort_entries.c.day).where(
                    storage.effort_entries.c.ws_id == ws.ws_id,
                    storage.effort_entries.c.task_id == task_id,
                    storage.effort_entries.c.actual.isnot(None),
                )
            )
        ]
        if days:
            when = ws.planned_start + _days(max(days) - 1)
            return datetime.combine(when, time(12, 0), timezone.utc).isoformat()
        return self.clock().isoformat()

    def _apply_effort(self, conn, ws_id, plan, created, updated) -> None:
        for action in plan.creates:
            if action.kind != "effort":
                continue
            task_id, day = action.entity_id.rsplit("@", 1)
            conn.execute(
                insert(storage.effort_entries).values(
                    ws_id=ws_id,
                    task_id=task_id,
                    day=int(day),
                    remaining=action.fields["remaining"],
                    actual=action.fields["actual"],
                )
            )
            created["effort"] = created.get("effort", 0) + 1
        for action in plan.updates:
            if action.kind != "effort":
                continue
            updated["effort"] = updated.get("effort", 0) + 1
            if not action.changes:
                continue
            task_id, day = action.entity_id.rsplit("@", 1)
            existing = conn.execute(
                select(storage.effort_entries).where(
                    storage.effort_entries.c.ws_id == ws_id,
                    storage.effort_entries.c.task_id == task_id,
                    storage.effort_entries.c.day == int(day),
                )
            ).first()
            # The diff carries changed fields only; the companion value stays.
            row = {
                "remaining": existing.remaining if existing else None,
                "actual": existing.actual if existing else None,
            }
            for change in action.changes:
                row[change.field] = change.new
            conn.execute(
                delete(storage.effort_entries).where(
                    storage.effort_entries.c.ws_id == ws_id,
                    storage.effort_entries.c.task_id == task_id,
                    storage.effort_entries.c.day == int(day),
                )
            )
            conn.execute(
                insert(storage.effort_entries).values(
                    ws_id=ws_id,
                    task_id=task_id,
                    day=int(day),
                    remaining=row["remaining"],
                    actual=row["actual"],
                )
            )


def _diff(existing: dict, incoming: dict) -> tuple[FieldChange, ...]:
    changes = []
    for key, new in incoming.items():
        old = existing.get(key)
        if old != new:
            changes.append(FieldChange(key, old, new))
    return tuple(changes)


def _days(n: int) -> timedelta:
    return timedelta(days=n)


class _Snapshot:
    """Workspace content keyed the way the planner compares it."""

    def __init__(self):
        self.stakeholders: dict[str, dict] = {}
        self.backlog_items: dict[str, dict] = {}
        self.tasks: dict[str, dict] = {}
        self.task_sprint_names: dict[str, str | None] = {}
        self.effort: dict[tuple[str, int], dict] = {}
        self.sprints_by_name: dict[str, dict] = {}
        self.workspace_fields: dict[str, Any] = {}
        self.state_hash = ""

    @staticmethod
    def load(conn: Connection, ws_id: str) -> "_Snapshot":
        snap = _Snapshot()
        ws = conn.execute(
            select(storage.workspaces).where(storage.workspaces.c.id == ws_id)
        ).first()
        snap.workspace_fields = {
            "name": ws.name,
            "status": ws.status,
            "process": ws.process,
            "benefits": ws.benefits,
            "success_criteria": ws.success_criteria,
            "planned_cost": ws.planned_cost,
            "current_cost": ws.current_cost,
            "planned_start": ws.planned_start,
            "planned_end": ws.planned_end,
        }
        for row in conn.execute(
            select(storage.stakeholders).where(storage.stakeholders.c.ws_id == ws_id)
        ):
            snap.stakeholders[row.stakeholder_id] = {
                "name": row.name,
                "email": row.email,
                "role": row.role,
            }
        for row in conn.execute(
            select(storage.backlog_items).where(storage.backlog_items.c.ws_id == ws_id)
        ):
            snap.backlog_items[row.item_id] = {
                "name": row.name,
                "description": row.description,
                "item_type": row.item_type,
                "priority": row.priority,
                "status": row.status,
                "effort_estimate": row.effort_estimate,
            }
        sprint_names: dict[str, str] = {}
        for row in conn.execute(
            select(storage.sprints)
            .where(storage.sprints.c.ws_id == ws_id)
            .order_by(storage.sprints.c.seq)
        ):
            sprint_names[row.id] = row.name
            start = date.fromisoformat(row.start_date)
            end = date.fromisoformat(row.end_date)
            snap.sprints_by_name.setdefault(
                row.name, {"id": row.id, "day_count": (end - start).days + 1}
            )
        for row in conn.execute(select(storage.tasks).where(storage.tasks.c.ws_id == ws_id)):
            sprint_name = sprint_names.get(row.sprint_id) if row.sprint_id else None
            snap.task_sprint_names[row.task_id] = sprint_name
            snap.tasks[row.task_id] = {
                "sprint": sprint_name,
                "name": row.name,
                "description": row.description,
                "task_type": row.task_type,
                "priority": row.priority,
                "assignees": json.loads(row.assignees),
                "planned_effort": row.planned_effort,
                "status": row.status,
            }
        for row in conn.execute(
            select(storage.effort_entries).where(storage.effort_entries.c.ws_id == ws_id)
        ):
            snap.effort[(row.task_id, row.day)] = {
                "remaining": row.remaining,
                "actual": row.actual,
            }
        snap.state_hash = storage.workspace_state_hash(conn, ws_id)
        return snap
