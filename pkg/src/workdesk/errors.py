"""Machine-readable error codes shared by every service and the HTTP layer.

Every operation failure raises :class:`DomainError` carrying one code from
the closed registry below; the API layer maps each code to exactly one HTTP
status (see ``workdesk.api.ERROR_STATUS``).
"""

from __future__ import annotations

# Accounts, tenancy, invitations, files
E_EMAIL_TAKEN = "E-EMAIL-TAKEN"
E_WEAK_PASSWORD = "E-WEAK-PASSWORD"
E_BAD_EMAIL = "E-BAD-EMAIL"
E_EMPTY_NAME = "E-EMPTY-NAME"
E_FORBIDDEN = "E-FORBIDDEN"
E_UNAUTHENTICATED = "E-UNAUTHENTICATED"
E_BAD_DATES = "E-BAD-DATES"
E_NEG_COST = "E-NEG-COST"
E_UNKNOWN_USER = "E-UNKNOWN-USER"
E_DUPLICATE_INVITE = "E-DUPLICATE-INVITE"
E_NOT_PENDING = "E-NOT-PENDING"
E_WRONG_INVITEE = "E-WRONG-INVITEE"
E_NO_SUCH_VERSION = "E-NO-SUCH-VERSION"
E_NO_SUCH_ORG = "E-NO-SUCH-ORG"
E_NO_SUCH_WS = "E-NO-SUCH-WS"
E_NO_SUCH_USER = "E-NO-SUCH-USER"
E_NO_SUCH_FILE = "E-NO-SUCH-FILE"
E_NO_SUCH_INVITE = "E-NO-SUCH-INVITE"

# Backlog, sprints, tasks, effort
E_DUP_ITEM_ID = "E-DUP-ITEM-ID"
E_DUP_TASK_ID = "E-DUP-TASK-ID"
E_NO_SUCH_ITEM = "E-NO-SUCH-ITEM"
E_NO_SUCH_TASK = "E-NO-SUCH-TASK"
E_NO_SUCH_SPRINT = "E-NO-SUCH-SPRINT"
E_PROCESS_MISMATCH = "E-PROCESS-MISMATCH"
E_SPRINT_ACTIVE = "E-SPRINT-ACTIVE"
E_NO_ACTIVE_SPRINT = "E-NO-ACTIVE-SPRINT"
E_NOT_ACTIVE = "E-NOT-ACTIVE"
E_SPRINT_CLOSED = "E-SPRINT-CLOSED"
E_DAY_OUT_OF_RANGE = "E-DAY-OUT-OF-RANGE"
E_NEG_EFFORT = "E-NEG-EFFORT"
E_EMPTY_ENTRY = "E-EMPTY-ENTRY"
E_STALE_BOARD = "E-STALE-BOARD"

# Workbook import
E_NOT_XLSX = "E-NOT-XLSX"
E_NO_RECOGNIZED_SHEETS = "E-NO-RECOGNIZED-SHEETS"
E_MISSING_ID_COLUMN = "E-MISSING-ID-COLUMN"
E_BAD_SELECTION = "E-BAD-SELECTION"
E_HAS_CONFLICTS = "E-HAS-CONFLICTS"
E_STALE_PLAN = "E-STALE-PLAN"

# Report templates
E_TAG_UNKNOWN = "E-TAG-UNKNOWN"
E_TAG_SYNTAX = "E-TAG-SYNTAX"
E_SCOPE_MISMATCH = "E-SCOPE-MISMATCH"
E_NO_SUCH_TEMPLATE = "E-NO-SUCH-TEMPLATE"

# Notifications
E_UNKNOWN_KIND = "E-UNKNOWN-KIND"
E_NOT_ACTIONABLE = "E-NOT-ACTIONABLE"
E_NO_SUCH_NOTIFICATION = "E-NO-SUCH-NOTIFICATION"

# Operator surface
E_NOT_EMPTY = "E-NOT-EMPTY"
E_VALIDATION = "E-VALIDATION"

ALL_CODES: tuple[str, ...] = tuple(
    value
    for name, value in sorted(globals().items())
    if name.startswith("E_") and isinstance(value, str)
)


class DomainError(Exception):
    """Operation failure with a machine code, message, and optional field path."""

    def __init__(self, code: str, message: str, field: str | None = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.field = field
