"""Organization, workspace, and sprint analytics as chart-ready series.

Everything here is a pure, deterministic function of the stored snapshot:
no writes, stable ordering (ids ascending, days ascending), and sums taken
in that fixed order. Effort values are recorded in half-hour steps, so the
float sums are exact.

Series semantics:

- Sprint burn-down: day grid 1..D. Remaining(d) carries the latest recorded
  remaining value per task forward, starting from the task's planned effort
  before its first entry. Ideal(d) descends linearly from total planned to 0.
- Cumulative actual: prefix sums of recorded actual hours, non-decreasing.
- Organization productivity: tasks completed per calendar month, dense from
  first to last completion month.
- Participation: hours of multi-assignee tasks split evenly so per-person
  totals conserve the workspace total; assignee-free hours land in
  "Unassigned".
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from datetime import date, datetime

from sqlalchemy import select

from . import storage
from .agile import ISSUE_TYPES, TaskStatus
from .errors import DomainError, E_NO_SUCH_ORG, E_NO_SUCH_SPRINT, E_NO_SUCH_WS
from .tenancy import WorkspaceStatus


class ChartKind(str, enum.Enum):
    BAR = "Bar"
    LINE = "Line"
    PIE = "Pie"


@dataclass(frozen=True)
class ChartSeries:
    title: str
    kind: ChartKind
    unit: str
    categories: tuple[str, ...]
    datasets: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        for name, values in self.datasets:
            if len(values) != len(self.categories):
                raise ValueError(
                    f"dataset {name!r} has {len(values)} values for "
                    f"{len(self.categories)} categories"
                )
        if self.kind == ChartKind.PIE and len(self.datasets) != 1:
            raise ValueError("pie charts take exactly one dataset")

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "kind": self.kind.value,
            "unit": self.unit,
            "categories": list(self.categories),
            "datasets": [
                {"name": name, "values": list(values)} for name, values in self.datasets
            ],
        }

    def dataset(self, name: str) -> tuple[float, ...]:
        for ds_name, values in self.datasets:
            if ds_name == name:
                return values
        raise KeyError(name)


@dataclass(frozen=True)
class SprintStats:
    sprint_id: str
    name: str
    state: str
    open_issue_count: int
    progression: float
    solved_by_type: dict[str, int]
    per_day_remaining: tuple[float, ...]
    per_day_actual: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "sprint_id": self.sprint_id,
            "name": self.name,
            "state": self.state,
            "open_issue_count": self.open_issue_count,
            "progression": self.progression,
            "solved_by_type": dict(self.solved_by_type),
            "per_day_remaining": list(self.per_day_remaining),
            "per_day_actual": list(self.per_day_actual),
        }


# --------------------------------------------------------------------------
# Pure series math (plain data in, plain data out)
# --------------------------------------------------------------------------


def burndown_remaining(
    tasks: list[tuple[str, float]],
    entries: list[tuple[str, int, float | None, float | None]],
    day_count: int,
) -> list[float]:
    """Carry-forward remaining per day: latest entry at or before each day,
    falling back to the task's planned effort before its first entry."""
    remaining_entries: dict[str, dict[int, float]] = {}
    for task_id, day, remaining, _actual in entries:
        if remaining is not None:
            remaining_entries.setdefault(task_id, {})[day] = remaining
    series = []
    for day in range(1, day_count + 1):
        total = 0.0
        for task_id, planned in sorted(tasks):
            value = planned
            by_day = remaining_entries.get(task_id, {})
            candidates = [d for d in by_day if d <= day]
            if candidates:
                value = by_day[max(candidates)]
            total += value
        series.append(total)
    return series


def ideal_line(total_planned: float, day_count: int) -> list[float]:
    if day_count <= 1:
        return [total_planned] * day_count
    return [
        total_planned * (1 - (day - 1) / (day_count - 1)) for day in range(1, day_count + 1)
    ]


def cumulative_actual(
    entries: list[tuple[str, int, float | None, float | None]], day_count: int
) -> list[float]:
    per_day: dict[int, float] = {}
    for _task_id, day, _remaining, actual in sorted(entries, key=lambda e: (e[0], e[1])):
        if actual is not None:
            per_day[day] = per_day.get(day, 0.0) + actual
    series = []
    running = 0.0
    for day in range(1, day_count + 1):
        running += per_day.get(day, 0.0)
        series.append(running)
    return series


def per_day_actual(
    entries: list[tuple[str, int, float | None, float | None]], day_count: int
) -> list[float]:
    per_day: dict[int, float] = {}
    for _task_id, day, _remaining, actual in sorted(entries, key=lambda e: (e[0], e[1])):
        if actual is not None:
            per_day[day] = per_day.get(day, 0.0) + actual
    return [per_day.get(day, 0.0) for day in range(1, day_count + 1)]


def month_buckets(timestamps: list[datetime]) -> tuple[list[str], list[float]]:
    """Dense month axis ("YYYY-MM") from first to last timestamp, with counts."""
    if not timestamps:
        return [], []
    months = sorted({(t.year, t.month) for t in timestamps})
    (first_y, first_m), (last_y, last_m) = months[0], months[-1]
    axis: list[str] = []
    year, month = first_y, first_m
    while (year, month) <= (last_y, last_m):
        axis.append(f"{year:04d}-{month:02d}")
        month += 1
        if month == 13:
            year, month = year + 1, 1
    counts = {label: 0.0 for label in axis}
    for t in timestamps:
        counts[f"{t.year:04d}-{t.month:02d}"] += 1
    return axis, [counts[label] for label in axis]


def split_hours(
    task_assignees: dict[str, tuple[str, ...]], task_hours: dict[str, float]
) -> dict[str, float]:
    """Even split of each task's hours across its assignees; conserves totals."""
    per_person: dict[str, float] = {}
    for task_id in sorted(task_hours):
        hours = task_hours[task_id]
        if hours == 0.0:
            continue
        assignees = task_assignees.get(task_id, ())
        if not assignees:
            per_person["Unassigned"] = per_person.get("Unassigned", 0.0) + hours
            continue
        share = hours / len(assignees)
        for person in sorted(assignees):
            per_person[person] = per_person.get(person, 0.0) + share
    return per_person


# --------------------------------------------------------------------------
# Service
# --------------------------------------------------------------------------


class AnalyticsService:
    def __init__(self, db: storage.Database):
        self.db = db

    # -- organization level ---------------------------------------------------

    def org_summary(self, org_id: str) -> dict:
        with self.db.transaction() as conn:
            self._org_row(conn, org_id)
            ws_rows = conn.execute(
                select(storage.workspaces)
                .where(storage.workspaces.c.org_id == org_id)
                .order_by(storage.workspaces.c.id)
            ).all()
            by_status = {status.value: 0 for status in WorkspaceStatus}
            for row in ws_rows:
                by_status[row.status] += 1
            ws_ids = [row.id for row in ws_rows]

            members: set[str] = set()
            member_rows = conn.execute(
                select(storage.memberships.c.user_id, storage.memberships.c.scope_kind,
                       storage.memberships.c.scope_id)
            ).all()
            for m in member_rows:
                if (m.scope_kind == "org" and m.scope_id == org_id) or (
                    m.scope_kind == "ws" and m.scope_id in ws_ids
                ):
                    members.add(m.user_id)

            completed = 0
            for ws_id in ws_ids:
                completed += sum(
                    1
                    for t in conn.execute(
                        select(storage.tasks.c.status).where(storage.tasks.c.ws_id == ws_id)
                    )
                    if t.status == TaskStatus.DONE.value
                )
            return {
                "org_id": org_id,
                "workspaces_by_status": by_status,
                "workspace_count": len(ws_ids),
                "member_count": len(members),
                "completed_tasks": completed,
            }

    def org_analytics(self, org_id: str) -> list[ChartSeries]:
        """The five organization dashboards, in fixed order:
        work over time (Line), completed per workspace (Bar), status (Pie),
        users per workspace (Bar), planned vs current cost (Bar)."""
        with self.db.transaction() as conn:
            self._org_row(conn, org_id)
            ws_rows = conn.execute(
                select(storage.workspaces)
                .where(storage.workspaces.c.org_id == org_id)
                .order_by(storage.workspaces.c.id)
            ).all()
            ws_names = tuple(row.name for row in ws_rows)

            completions: list[datetime] = []
            done_per_ws: list[float] = []
            for row in ws_rows:
                done = 0
                for t in conn.execute(
                    select(storage.tasks.c.status, storage.tasks.c.completed_at).where(
                        storage.tasks.c.ws_id == row.id
                    )
                ):
                    if t.status == TaskStatus.DONE.value:
                        done += 1
                        if t.completed_at:
                            completions.append(datetime.fromisoformat(t.completed_at))
                done_per_ws.append(float(done))

            months, month_counts = month_buckets(completions)
            series_1 = ChartSeries(
                title="Work completed over time",
                kind=ChartKind.LINE,
                unit="tasks",
                categories=tuple(months),
                datasets=(("Completed", tuple(month_counts)),),
            )
            series_2 = ChartSeries(
                title="Completed work per workspace",
                kind=ChartKind.BAR,
                unit="tasks",
                categories=ws_names,
                datasets=(("Completed", tuple(done_per_ws)),),
            )
            status_order = tuple(status.value for status in WorkspaceStatus)
            status_counts = tuple(
                float(sum(1 for row in ws_rows if row.status == status))
                for status in status_order
            )
            series_3 = ChartSeries(
                title="Workspace status",
                kind=ChartKind.PIE,
                unit="workspaces",
                categories=status_order if ws_rows else (),
                datasets=(("Workspaces", status_counts if ws_rows else ()),),
            )
            member_rows = conn.execute(
                select(storage.memberships.c.scope_id, storage.memberships.c.user_id).where(
                    storage.memberships.c.scope_kind == "ws"
                )
            ).all()
            users_per_ws = tuple(
                float(sum(1 for m in member_rows if m.scope_id == row.id)) for row in ws_rows
            )
            series_4 = ChartSeries(
                title="Users involved per workspace",
                kind=ChartKind.BAR,
                unit="users",
                categories=ws_names,
                datasets=(("Users", users_per_ws),),
            )
            series_5 = ChartSeries(
                title="Planned vs current cost per workspace",
                kind=ChartKind.BAR,
                unit="EUR",
                categories=ws_names,
                datasets=(
                    ("Planned", tuple(float(row.planned_cost) for row in ws_rows)),
                    ("Current", tuple(float(row.current_cost) for row in ws_rows)),
                ),
            )
            return [series_1, series_2, series_3, series_4, series_5]

    # -- sprint level -------------------------------------------------------------

    def sprint_burndown(self, sprint_id: str) -> ChartSeries:
        with self.db.transaction() as conn:
            sprint, tasks, entries, day_count = self._sprint_data(conn, sprint_id)
            remaining = burndown_remaining(tasks, entries, day_count)
            total_planned = sum(planned for _task, planned in sorted(tasks))
            ideal = ideal_line(total_planned, day_count)
            return ChartSeries(
                title=f"Burn-down: {sprint.name}",
                kind=ChartKind.LINE,
                unit="hours",
                categories=tuple(str(d) for d in range(1, day_count + 1)),
                datasets=(
                    ("Remaining", tuple(remaining)),
                    ("Ideal", tuple(ideal)),
                ),
            )

    def sprint_actual_cumulative(self, sprint_id: str) -> ChartSeries:
        with self.db.transaction() as conn:
            sprint, _tasks, entries, day_count = self._sprint_data(conn, sprint_id)
            series = cumulative_actual(entries, day_count)
            return ChartSeries(
                title=f"Cumulative actual effort: {sprint.name}",
                kind=ChartKind.LINE,
                unit="hours",
                categories=tuple(str(d) for d in range(1, day_count + 1)),
                datasets=(("Actual", tuple(series)),),
            )

    def sprint_history_stats(self, sprint_id: str) -> SprintStats:
        with self.db.transaction() as conn:
            sprint, tasks, entries, day_count = self._sprint_data(conn, sprint_id)
            task_rows = conn.execute(
                select(storage.tasks)
                .where(storage.tasks.c.sprint_id == sprint_id)
                .order_by(storage.tasks.c.task_id)
            ).all()
            total = len(task_rows)
            done = [t for t in task_rows if t.status == TaskStatus.DONE.value]
            open_issues = sum(
                1
                for t in task_rows
                if t.task_type in {i.value for i in ISSUE_TYPES}
                and t.status != TaskStatus.DONE.value
            )
            solved: dict[str, int] = {}
            for t in done:
                solved[t.task_type] = solved.get(t.task_type, 0) + 1
            return SprintStats(
                sprint_id=sprint_id,
                name=sprint.name,
                state=sprint.state,
                open_issue_count=open_issues,
                progression=(100.0 * len(done) / total) if total else 0.0,
                solved_by_type=solved,
                per_day_remaining=tuple(burndown_remaining(tasks, entries, day_count)),
                per_day_actual=tuple(per_day_actual(entries, day_count)),
            )

    # -- workspace level ------------------------------------------------------------

    def workspace_analytics(self, ws_id: str) -> dict[str, ChartSeries]:
        with self.db.transaction() as conn:
            ws = conn.execute(
                select(storage.workspaces).where(storage.workspaces.c.id == ws_id)
            ).first()
            if ws is None:
                raise DomainError(E_NO_SUCH_WS, f"no workspace {ws_id}")

            sprint_rows = conn.execute(
                select(storage.sprints)
                .where(storage.sprints.c.ws_id == ws_id)
                .order_by(storage.sprints.c.start_date, storage.sprints.c.seq)
            ).all()
            task_rows = conn.execute(
                select(storage.tasks)
                .where(storage.tasks.c.ws_id == ws_id)
                .order_by(storage.tasks.c.task_id)
            ).all()
            entry_rows = conn.execute(
                select(storage.effort_entries)
                .where(storage.effort_entries.c.ws_id == ws_id)
                .order_by(storage.effort_entries.c.task_id, storage.effort_entries.c.day)
            ).all()

            actual_per_task: dict[str, float] = {}
            for e in entry_rows:
                if e.actual is not None:
                    actual_per_task[e.task_id] = actual_per_task.get(e.task_id, 0.0) + e.actual

            sprint_names = tuple(s.name for s in sprint_rows)
            done_counts = []
            hour_sums = []
            people_counts = []
            for s in sprint_rows:
                members = set()
                done = 0
                hours = 0.0
                for t in task_rows:
                    if t.sprint_id != s.id:
                        continue
                    members.update(json.loads(t.assignees))
                    if t.status == TaskStatus.DONE.value:
                        done += 1
                    hours += actual_per_task.get(t.task_id, 0.0)
                done_counts.append(float(done))
                hour_sums.append(hours)
                people_counts.append(float(len(members)))

            velocity = ChartSeries(
                title="Velocity per sprint",
                kind=ChartKind.BAR,
                unit="tasks / hours",
                categories=sprint_names,
                datasets=(
                    ("Tasks done", tuple(done_counts)),
                    ("Actual hours", tuple(hour_sums)),
                ),
            )

            item_rows = conn.execute(
                select(storage.backlog_items)
                .where(storage.backlog_items.c.ws_id == ws_id)
                .order_by(storage.backlog_items.c.item_id)
            ).all()
            status_labels = ("Open", "InProgress", "Done")
            status_counts = tuple(
                float(sum(1 for i in item_rows if i.status == label)) for label in status_labels
            )
            item_status = ChartSeries(
                title="Backlog items by status",
                kind=ChartKind.PIE,
                unit="items",
                categories=status_labels if item_rows else (),
                datasets=(("Items", status_counts if item_rows else ()),),
            )
            type_labels = ("Feature", "Improvement", "Bug", "Issue")
            type_counts = tuple(
                float(sum(1 for i in item_rows if i.item_type == label)) for label in type_labels
            )
            item_types = ChartSeries(
                title="Backlog items by type",
                kind=ChartKind.PIE,
                unit="items",
                categories=type_labels if item_rows else (),
                datasets=(("Items", type_counts if item_rows else ()),),
            )

            participation = ChartSeries(
                title="People involved per sprint",
                kind=ChartKind.BAR,
                unit="people",
                categories=sprint_names,
                datasets=(("People", tuple(people_counts)),),
            )

            assignees_by_task = {t.task_id: tuple(json.loads(t.assignees)) for t in task_rows}
            per_person = split_hours(assignees_by_task, actual_per_task)
            people = tuple(sorted(per_person))
            member_hours = ChartSeries(
                title="Actual hours per person",
                kind=ChartKind.BAR,
                unit="hours",
                categories=people,
                datasets=(("Hours", tuple(per_person[p] for p in people)),),
            )

            return {
                "velocity": velocity,
                "item_status": item_status,
                "item_types": item_types,
                "sprint_participation": participation,
                "member_hours": member_hours,
            }

    # -- shared helpers ---------------------------------------------------------------

    def _org_row(self, conn, org_id: str):
        row = conn.execute(select(storage.orgs).where(storage.orgs.c.id == org_id)).first()
        if row is None:
            raise DomainError(E_NO_SUCH_ORG, f"no organization {org_id}")
        return row

    def _sprint_data(self, conn, sprint_id: str):
        sprint = conn.execute(
            select(storage.sprints).where(storage.sprints.c.id == sprint_id)
        ).first()
        if sprint is None:
            raise DomainError(E_NO_SUCH_SPRINT, f"no sprint {sprint_id}")
        day_count = (
            date.fromisoformat(sprint.end_date) - date.fromisoformat(sprint.start_date)
        ).days + 1
        task_rows = conn.execute(
            select(storage.tasks)
            .where(storage.tasks.c.sprint_id == sprint_id)
            .order_by(storage.tasks.c.task_id)
        ).all()
        tasks = [(t.task_id, float(t.planned_effort)) for t in task_rows]
        task_ids = {t.task_id for t in task_rows}
        entry_rows = conn.execute(
            select(storage.effort_entries)
            .where(storage.effort_entries.c.ws_id == sprint.ws_id)
            .order_by(storage.effort_entries.c.task_id, storage.effort_entries.c.day)
        ).all()
        entries = [
            (e.task_id, e.day, e.remaining, e.actual)
            for e in entry_rows
            if e.task_id in task_ids
        ]
        return sprint, tasks, entries, day_count
