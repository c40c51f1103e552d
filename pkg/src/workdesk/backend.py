"""Wires the storage gateway, event bus, and every service into one backend."""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Callable

from .agile import AgileService
from .analytics import AnalyticsService
from .config import AppConfig
from .events import EventBus
from .files import FileService
from .identity import IdentityService
from .importer import ImportService
from .notifications import NotificationHub, NotificationService
from .reports import ReportService
from .storage import Database
from .tenancy import TenancyService


class Clock:
    """Settable time source so fixtures and tests replay at fixed instants."""

    def __init__(self, fn: Callable[[], datetime] | None = None):
        self._fn = fn or (lambda: datetime.now(timezone.utc))

    def __call__(self) -> datetime:
        return self._fn()

    def fix(self, instant: datetime) -> None:
        self._fn = lambda: instant

    def reset(self) -> None:
        self._fn = lambda: datetime.now(timezone.utc)


class Backend:
    def __init__(
        self,
        db: Database,
        config: AppConfig | None = None,
        clock: Clock | None = None,
        token_factory: Callable[[], str] | None = None,
    ):
        self.db = db
        self.config = config or AppConfig()
        self.clock = clock or Clock()
        self.bus = EventBus(db)
        self.hub = NotificationHub()

        self.identity = IdentityService(
            db, self.clock, hash_log2_n=self.config.hash_log2_n, token_factory=token_factory
        )
        self.tenancy = TenancyService(
            db, self.bus, self.identity, self.clock, token_factory=token_factory
        )
        self.files = FileService(db, self.clock)
        self.agile = AgileService(db, self.tenancy, self.clock)
        self.importer = ImportService(db, self.tenancy, self.bus, self.clock)
        self.analytics = AnalyticsService(db)
        self.reports = ReportService(db, self.tenancy)
        self.notifications = NotificationService(
            db,
            self.identity,
            self.tenancy,
            self.clock,
            hub=self.hub,
            deadline_threshold_days=self.config.deadline_threshold_days,
        )
        self.bus.subscribe(self.notifications.handle_event)

    def register_user(self, email: str, display_name: str, password: str):
        """Registration plus the platform-admin bootstrap from config."""
        account = self.identity.register_user(email, display_name, password)
        if account.email in {e.lower() for e in self.config.admin_emails}:
            self.tenancy.grant_platform_admin(account.user_id)
        return account


def build_backend(config: AppConfig, migrate: bool = True, **kwargs) -> Backend:
    db = Database(config.storage_url)
    if migrate:
        db.migrate()
    return Backend(db, config, **kwargs)
