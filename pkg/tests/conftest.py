import warnings
from datetime import date, datetime, timezone

import pytest

from workdesk.agile import ItemType, Priority
from workdesk.backend import Backend, Clock
from workdesk.config import AppConfig
from workdesk.storage import Database
from workdesk.tenancy import Process, WorkspaceStatus

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")

FIXED_NOW = datetime(2022, 9, 15, 12, 0, tzinfo=timezone.utc)

#: One line per acceptance criterion, printed after the run (outside capture).
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def make_backend(admin_emails=()) -> Backend:
    db = Database("sqlite://")
    db.migrate()
    clock = Clock()
    clock.fix(FIXED_NOW)
    config = AppConfig(hash_log2_n=10, admin_emails=list(admin_emails))
    return Backend(db, config, clock=clock)


@pytest.fixture
def backend() -> Backend:
    return make_backend()


@pytest.fixture
def manager(backend):
    """A registered user holding OrganizationManager on a fresh org."""
    account = backend.register_user("ana@example.test", "Ana", "password-123")
    org = backend.tenancy.create_organization(account.user_id, "Acme", "IT", "PT")
    return account, org


@pytest.fixture
def workspace(backend, manager):
    account, org = manager
    ws = backend.tenancy.create_workspace(
        account.user_id,
        org.org_id,
        "Alpha",
        Process.SCRUM,
        WorkspaceStatus.ACTIVE,
        "",
        "",
        10000,
        0,
        date(2022, 3, 1),
        date(2022, 7, 31),
    )
    return account, org, ws


def register(backend, email, name="User", password="password-123"):
    return backend.register_user(email, name, password)


def add_item(backend, actor, ws_id, name="Item", **kwargs):
    defaults = dict(item_type=ItemType.FEATURE, priority=Priority.MEDIUM, effort_estimate=4.0)
    defaults.update(kwargs)
    return backend.agile.add_backlog_item(actor, ws_id, name, **defaults)


def move(backend, actor, ws_id, task_id, status):
    version = backend.tenancy.get_workspace(ws_id).board_version
    return backend.agile.move_task(actor, ws_id, task_id, status, version)
