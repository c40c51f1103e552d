"""Backlog, sprints, tasks, effort, and the optimistic board contract."""

import random
from datetime import date

import pytest

from conftest import add_item, make_backend, move, register
from workdesk import errors
from workdesk.agile import ItemStatus, ItemType, Priority, SprintState, TaskStatus, next_generated_id
from workdesk.errors import DomainError
from workdesk.storage import workspace_state_hash
from workdesk.tenancy import Process, WorkspaceStatus


def expect_error(code):
    return pytest.raises(DomainError, match=code)


def make_sprint(backend, actor, ws, name="Sprint 1", days=14):
    return backend.agile.create_sprint(
        actor, ws.ws_id, name, date(2022, 3, 1), date(2022, 3, days), []
    )


# -- id generation ------------------------------------------------------------


@pytest.mark.parametrize(
    "existing,prefix,expected",
    [
        ([], "PBI", "PBI-1"),
        (["PBI-1", "PBI-2"], "PBI", "PBI-3"),
        (["PBI-7"], "PBI", "PBI-8"),
        (["ITEM-9", "misc"], "PBI", "PBI-1"),
        (["PBI-2", "T-5"], "T", "T-6"),
        (["PBI-x", "PBI-03"], "PBI", "PBI-4"),
    ],
)
def test_next_generated_id(existing, prefix, expected):
    assert next_generated_id(existing, prefix) == expected


def test_generated_ids_skip_imported(backend, workspace):
    ana, org, ws = workspace
    add_item(backend, ana.user_id, ws.ws_id, "imported", item_id="PBI-5")
    item = add_item(backend, ana.user_id, ws.ws_id, "generated")
    assert item.item_id == "PBI-6"


# -- backlog --------------------------------------------------------------------


def test_add_item_generates_first_id(backend, workspace):
    ana, org, ws = workspace
    item = add_item(backend, ana.user_id, ws.ws_id, "Login page", effort_estimate=8.0)
    assert item.item_id == "PBI-1"
    assert item.status == ItemStatus.OPEN


def test_add_item_duplicate_explicit_id(backend, workspace):
    ana, org, ws = workspace
    add_item(backend, ana.user_id, ws.ws_id, "One", item_id="PBI-1")
    with expect_error(errors.E_DUP_ITEM_ID):
        add_item(backend, ana.user_id, ws.ws_id, "Two", item_id="PBI-1")


def test_add_item_empty_description_ok(backend, workspace):
    ana, org, ws = workspace
    item = add_item(backend, ana.user_id, ws.ws_id, "No description", description=None)
    assert item.description is None


# -- sprints ----------------------------------------------------------------------


def test_first_sprint_active(backend, workspace):
    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    assert sprint.state == SprintState.ACTIVE
    assert sprint.day_count == 14


def test_second_active_sprint_rejected(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    with expect_error(errors.E_SPRINT_ACTIVE):
        backend.agile.create_sprint(
            ana.user_id, ws.ws_id, "Sprint 2", date(2022, 4, 1), date(2022, 4, 14), []
        )


def test_sprint_on_kanban_workspace(backend, manager):
    ana, org = manager
    ws = backend.tenancy.create_workspace(
        ana.user_id, org.org_id, "Board", Process.KANBAN, WorkspaceStatus.ACTIVE,
        "", "", 0, 0, date(2022, 1, 1), date(2022, 12, 31),
    )
    with expect_error(errors.E_PROCESS_MISMATCH):
        make_sprint(backend, ana.user_id, ws)


def test_sprint_bad_dates(backend, workspace):
    ana, org, ws = workspace
    with expect_error(errors.E_BAD_DATES):
        backend.agile.create_sprint(
            ana.user_id, ws.ws_id, "S", date(2022, 3, 14), date(2022, 3, 1), []
        )


def test_close_then_new_sprint(backend, workspace):
    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    closed = backend.agile.close_sprint(ana.user_id, sprint.sprint_id)
    assert closed.state == SprintState.CLOSED
    again = backend.agile.create_sprint(
        ana.user_id, ws.ws_id, "Sprint 2", date(2022, 4, 1), date(2022, 4, 14), []
    )
    assert again.state == SprintState.ACTIVE


def test_close_twice(backend, workspace):
    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    backend.agile.close_sprint(ana.user_id, sprint.sprint_id)
    with expect_error(errors.E_NOT_ACTIVE):
        backend.agile.close_sprint(ana.user_id, sprint.sprint_id)


def test_one_active_sprint_under_random_ops(backend, workspace):
    """Property: no interleaving of create/close ever yields two active sprints."""
    ana, org, ws = workspace
    rng = random.Random(1234)
    n = 0
    for _ in range(60):
        action = rng.choice(["create", "close"])
        active = backend.agile.active_sprint(ws.ws_id)
        if action == "create":
            n += 1
            try:
                backend.agile.create_sprint(
                    ana.user_id, ws.ws_id, f"S{n}", date(2022, 3, 1), date(2022, 3, 5), []
                )
            except DomainError as exc:
                assert exc.code == errors.E_SPRINT_ACTIVE
                assert active is not None
        else:
            if active is not None:
                backend.agile.close_sprint(ana.user_id, active.sprint_id)
        actives = backend.agile.sprints_of(ws.ws_id, SprintState.ACTIVE)
        assert len(actives) <= 1


# -- process switching -----------------------------------------------------------------


def test_set_process_round_trip(backend, manager):
    ana, org = manager
    ws = backend.tenancy.create_workspace(
        ana.user_id, org.org_id, "Board", Process.KANBAN, WorkspaceStatus.ACTIVE,
        "", "", 0, 0, date(2022, 1, 1), date(2022, 12, 31),
    )
    backend.agile.set_process(ana.user_id, ws.ws_id, Process.SCRUM)
    assert backend.tenancy.get_workspace(ws.ws_id).process == Process.SCRUM
    backend.agile.set_process(ana.user_id, ws.ws_id, Process.SCRUM)  # idempotent
    assert backend.tenancy.get_workspace(ws.ws_id).process == Process.SCRUM


def test_switch_to_kanban_blocked_by_active_sprint(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    with expect_error(errors.E_SPRINT_ACTIVE):
        backend.agile.set_process(ana.user_id, ws.ws_id, Process.KANBAN)


def test_closed_sprints_survive_process_switch(backend, workspace):
    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    backend.agile.close_sprint(ana.user_id, sprint.sprint_id)
    backend.agile.set_process(ana.user_id, ws.ws_id, Process.KANBAN)
    history = backend.agile.sprints_of(ws.ws_id, SprintState.CLOSED)
    assert [s.sprint_id for s in history] == [sprint.sprint_id]


# -- tasks -----------------------------------------------------------------------------------


def test_task_from_backlog_copies_fields(backend, workspace):
    ana, org, ws = workspace
    item = add_item(
        backend, ana.user_id, ws.ws_id, "Login page",
        item_type=ItemType.FEATURE, priority=Priority.HIGH,
        effort_estimate=8.0, description="login & session",
    )
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, source_item_id=item.item_id)
    assert task.task_id == "T-1"
    assert (task.name, task.task_type, task.priority) == (
        "Login page", ItemType.FEATURE, Priority.HIGH,
    )
    assert task.planned_effort == 8.0
    assert task.description == "login & session"
    assert task.status == TaskStatus.TODO
    assert backend.agile.get_item(ws.ws_id, item.item_id).status == ItemStatus.IN_PROGRESS


def test_task_duplicate_explicit_id(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    backend.agile.create_task(ana.user_id, ws.ws_id, name="A", task_id="T-9")
    with expect_error(errors.E_DUP_TASK_ID):
        backend.agile.create_task(ana.user_id, ws.ws_id, name="B", task_id="T-9")


def test_task_requires_active_sprint_in_scrum(backend, workspace):
    ana, org, ws = workspace
    with expect_error(errors.E_NO_ACTIVE_SPRINT):
        backend.agile.create_task(ana.user_id, ws.ws_id, name="orphan")


def test_task_from_missing_item(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    with expect_error(errors.E_NO_SUCH_ITEM):
        backend.agile.create_task(ana.user_id, ws.ws_id, source_item_id="PBI-404")


def test_item_done_only_when_all_tasks_done(backend, workspace):
    ana, org, ws = workspace
    item = add_item(backend, ana.user_id, ws.ws_id, "Feature", effort_estimate=4.0)
    make_sprint(backend, ana.user_id, ws)
    t1 = backend.agile.create_task(ana.user_id, ws.ws_id, source_item_id=item.item_id)
    t2 = backend.agile.create_task(ana.user_id, ws.ws_id, source_item_id=item.item_id)
    move(backend, ana.user_id, ws.ws_id, t1.task_id, TaskStatus.DONE)
    assert backend.agile.get_item(ws.ws_id, item.item_id).status == ItemStatus.IN_PROGRESS
    move(backend, ana.user_id, ws.ws_id, t2.task_id, TaskStatus.DONE)
    assert backend.agile.get_item(ws.ws_id, item.item_id).status == ItemStatus.DONE
    move(backend, ana.user_id, ws.ws_id, t2.task_id, TaskStatus.IN_PROGRESS)
    assert backend.agile.get_item(ws.ws_id, item.item_id).status == ItemStatus.IN_PROGRESS


# -- effort ------------------------------------------------------------------------------------


def test_record_and_replace_effort(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T", planned_effort=10)
    backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 3, remaining=5, actual=3)
    backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 3, remaining=4)
    entries = backend.agile.effort_for_task(ws.ws_id, task.task_id)
    assert len(entries) == 1
    assert (entries[0].remaining, entries[0].actual) == (4, None)


def test_effort_day_out_of_range(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws, days=14)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    with expect_error(errors.E_DAY_OUT_OF_RANGE):
        backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 15, actual=1)
    with expect_error(errors.E_DAY_OUT_OF_RANGE):
        backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 0, actual=1)


def test_effort_validation(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    with expect_error(errors.E_EMPTY_ENTRY):
        backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 1)
    with expect_error(errors.E_NEG_EFFORT):
        backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 1, remaining=-1)


def test_effort_on_closed_sprint(backend, workspace):
    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    backend.agile.close_sprint(ana.user_id, sprint.sprint_id)
    with expect_error(errors.E_SPRINT_CLOSED):
        backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 2, actual=1)


def test_kanban_effort_day_range_is_workspace_window(backend, manager):
    ana, org = manager
    ws = backend.tenancy.create_workspace(
        ana.user_id, org.org_id, "Board", Process.KANBAN, WorkspaceStatus.ACTIVE,
        "", "", 0, 0, date(2022, 1, 1), date(2022, 1, 10),
    )
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="K")
    backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 10, actual=1)
    with expect_error(errors.E_DAY_OUT_OF_RANGE):
        backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 11, actual=1)


# -- board moves ----------------------------------------------------------------------------------


def test_move_task_bumps_version(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    moved, version = backend.agile.move_task(
        ana.user_id, ws.ws_id, task.task_id, TaskStatus.IN_PROGRESS, 0
    )
    assert version == 1
    assert moved.status == TaskStatus.IN_PROGRESS
    assert backend.tenancy.get_workspace(ws.ws_id).board_version == 1


def test_stale_move_changes_nothing(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    backend.agile.move_task(ana.user_id, ws.ws_id, task.task_id, TaskStatus.IN_PROGRESS, 0)
    with backend.db.transaction() as conn:
        before = workspace_state_hash(conn, ws.ws_id)
    with expect_error(errors.E_STALE_BOARD):
        backend.agile.move_task(ana.user_id, ws.ws_id, task.task_id, TaskStatus.DONE, 0)
    with backend.db.transaction() as conn:
        after = workspace_state_hash(conn, ws.ws_id)
    assert before == after
    assert backend.agile.get_task(ws.ws_id, task.task_id).status == TaskStatus.IN_PROGRESS


def test_move_to_done_sets_completed_at(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    moved, _ = backend.agile.move_task(ana.user_id, ws.ws_id, task.task_id, TaskStatus.DONE, 0)
    assert moved.completed_at is not None
    back, _ = backend.agile.move_task(ana.user_id, ws.ws_id, task.task_id, TaskStatus.TODO, 1)
    assert back.completed_at is None


def test_version_increases_by_one_per_successful_move(backend, workspace):
    ana, org, ws = workspace
    make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    rng = random.Random(5)
    version = 0
    for _ in range(20):
        status = rng.choice(list(TaskStatus))
        if rng.random() < 0.3:  # stale attempt
            with expect_error(errors.E_STALE_BOARD):
                backend.agile.move_task(ana.user_id, ws.ws_id, task.task_id, status, version + 7)
        else:
            _, new_version = backend.agile.move_task(
                ana.user_id, ws.ws_id, task.task_id, status, version
            )
            assert new_version == version + 1
            version = new_version


def test_move_in_closed_sprint_rejected(backend, workspace):
    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T")
    backend.agile.close_sprint(ana.user_id, sprint.sprint_id)
    with expect_error(errors.E_SPRINT_CLOSED):
        move(backend, ana.user_id, ws.ws_id, task.task_id, TaskStatus.DONE)


def test_closed_sprint_data_bit_identical_after_activity(backend, workspace):
    """Closed-sprint content is frozen under later interactive workspace activity."""
    from sqlalchemy import select

    from workdesk import storage

    ana, org, ws = workspace
    sprint = make_sprint(backend, ana.user_id, ws)
    task = backend.agile.create_task(ana.user_id, ws.ws_id, name="T", planned_effort=8)
    backend.agile.record_effort(ana.user_id, ws.ws_id, task.task_id, 2, remaining=4, actual=4)
    move(backend, ana.user_id, ws.ws_id, task.task_id, TaskStatus.DONE)
    backend.agile.close_sprint(ana.user_id, sprint.sprint_id)

    def snapshot():
        with backend.db.transaction() as conn:
            sprint_row = conn.execute(
                select(storage.sprints).where(storage.sprints.c.id == sprint.sprint_id)
            ).first()
            task_rows = conn.execute(
                select(storage.tasks)
                .where(storage.tasks.c.sprint_id == sprint.sprint_id)
                .order_by(storage.tasks.c.task_id)
            ).all()
            effort_rows = conn.execute(
                select(storage.effort_entries)
                .where(storage.effort_entries.c.task_id == task.task_id)
                .order_by(storage.effort_entries.c.day)
            ).all()
            return (
                tuple(sprint_row._mapping.items()),
                tuple(tuple(r._mapping.items()) for r in task_rows),
                tuple(tuple(r._mapping.items()) for r in effort_rows),
            )

    before = snapshot()
    sprint2 = backend.agile.create_sprint(
        ana.user_id, ws.ws_id, "Sprint 2", date(2022, 4, 1), date(2022, 4, 14), []
    )
    other = backend.agile.create_task(ana.user_id, ws.ws_id, name="Other", planned_effort=2)
    backend.agile.record_effort(ana.user_id, ws.ws_id, other.task_id, 1, actual=1)
    move(backend, ana.user_id, ws.ws_id, other.task_id, TaskStatus.DONE)
    add_item(backend, ana.user_id, ws.ws_id, "New item")
    backend.agile.close_sprint(ana.user_id, sprint2.sprint_id)
    assert snapshot() == before


def test_replaying_op_log_reproduces_state():
    """Determinism: the same op log against a fresh store yields the same hash."""

    def run():
        backend = make_backend()
        ana = register(backend, "ana@x.example")
        org = backend.tenancy.create_organization(ana.user_id, "Acme")
        ws = backend.tenancy.create_workspace(
            ana.user_id, org.org_id, "Alpha", Process.SCRUM, WorkspaceStatus.ACTIVE,
            "", "", 100, 0, date(2022, 3, 1), date(2022, 3, 14),
        )
        rng = random.Random(99)
        backend.agile.create_sprint(
            ana.user_id, ws.ws_id, "S1", date(2022, 3, 1), date(2022, 3, 14), []
        )
        for step in range(40):
            op = rng.choice(["item", "task", "effort", "move"])
            tasks = backend.agile.tasks_of(ws.ws_id)
            if op == "item":
                add_item(backend, ana.user_id, ws.ws_id, f"item{step}")
            elif op == "task":
                backend.agile.create_task(
                    ana.user_id, ws.ws_id, name=f"task{step}",
                    planned_effort=rng.randrange(0, 17) / 2,
                )
            elif op == "effort" and tasks:
                target = rng.choice(tasks)
                backend.agile.record_effort(
                    ana.user_id, ws.ws_id, target.task_id,
                    rng.randint(1, 14),
                    remaining=rng.randrange(0, 17) / 2,
                    actual=rng.randrange(0, 9) / 2,
                )
            elif op == "move" and tasks:
                target = rng.choice(tasks)
                move(backend, ana.user_id, ws.ws_id, target.task_id, rng.choice(list(TaskStatus)))
        with backend.db.transaction() as conn:
            return workspace_state_hash(conn, ws.ws_id)

    assert run() == run()
