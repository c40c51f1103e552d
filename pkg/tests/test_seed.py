"""Demo fixture determinism and content sanity."""

import pytest

from workdesk.backend import Backend
from workdesk.config import AppConfig
from workdesk.errors import DomainError
from workdesk.seed import BIER_EXPECTED, seed, seed_state_hash
from workdesk.storage import Database


def seeded():
    db = Database("sqlite://")
    db.migrate()
    backend = Backend(db, AppConfig(hash_log2_n=10))
    ids = seed(backend)
    return db, backend, ids


def test_seed_refuses_non_empty_store():
    db, backend, _ids = seeded()
    with pytest.raises(DomainError, match="E-NOT-EMPTY"):
        seed(backend)


def test_seed_force_reseeds():
    db, backend, first = seeded()
    second = seed(backend, force=True)
    assert second == first


def test_seed_state_hash_constant_across_runs():
    db1, *_ = seeded()
    db2, *_ = seeded()
    assert seed_state_hash(db1) == seed_state_hash(db2)


def test_seed_content_shape():
    _db, backend, ids = seeded()
    org_id = ids["org_id"]
    summary = backend.analytics.org_summary(org_id)
    assert summary["workspace_count"] == 3
    assert summary["workspaces_by_status"] == {"Active": 1, "Canceled": 1, "Completed": 1}
    assert summary["member_count"] == BIER_EXPECTED["org_member_count"]
    lp = ids["workspaces"]["Loan Portal"]
    sprints = backend.agile.sprints_of(lp)
    closed = [s for s in sprints if s.state.value == "Closed"]
    assert len(closed) >= 2
    for sprint in closed:
        entries = [
            e
            for task in backend.agile.tasks_of(lp, sprint_id=sprint.sprint_id)
            for e in backend.agile.effort_for_task(lp, task.task_id)
        ]
        assert entries, f"closed sprint {sprint.name} should carry effort history"


def test_seed_fixture_money_renders_two_decimals():
    _db, backend, ids = seeded()
    ana = ids["users"]["ana"]
    template = backend.reports.register_template(
        ana, "Workspace", "cost-check", "{{workspace.planned_cost}}"
    )
    text = backend.reports.render_report(
        ana, template.template_id, ids["workspaces"]["Loan Portal"]
    )
    assert text == "50000.00"


def test_seed_has_pending_invites_and_outbox():
    _db, backend, ids = seeded()
    outbox = backend.notifications.outbox()
    assert [mail["to"] for mail in outbox] == ["frank@bier.example"]
    grace = backend.identity.find_by_email("grace@bier.example")
    feed = backend.notifications.fetch(grace.user_id)
    assert [n.kind for n in feed] == ["InviteCreated"]
