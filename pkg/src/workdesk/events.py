"""Domain events: the write-side carrier notifications are fanned out from."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from typing import Callable

from sqlalchemy import insert
from sqlalchemy.engine import Connection

from . import storage

INVITE_CREATED = "InviteCreated"
INVITE_ACCEPTED = "InviteAccepted"
INVITE_REJECTED = "InviteRejected"
DEADLINE_APPROACHING = "DeadlineApproaching"
IMPORT_COMPLETED = "ImportCompleted"

EVENT_KINDS = (
    INVITE_CREATED,
    INVITE_ACCEPTED,
    INVITE_REJECTED,
    DEADLINE_APPROACHING,
    IMPORT_COMPLETED,
)


@dataclass(frozen=True)
class DomainEvent:
    event_id: str
    kind: str
    payload: dict
    occurred_at: datetime


class EventBus:
    """Persists events and dispatches them to subscribers inside the emitting
    transaction, so a rolled-back operation leaves neither events nor fan-out."""

    def __init__(self, db: storage.Database):
        self.db = db
        self._handlers: list[Callable[[Connection, DomainEvent], None]] = []

    def subscribe(self, handler: Callable[[Connection, DomainEvent], None]) -> None:
        self._handlers.append(handler)

    def emit(self, conn: Connection, kind: str, payload: dict, occurred_at: datetime) -> DomainEvent:
        event = DomainEvent(
            event_id=self.db.new_id(conn, "evt"),
            kind=kind,
            payload=payload,
            occurred_at=occurred_at,
        )
        conn.execute(
            insert(storage.events).values(
                id=event.event_id,
                kind=event.kind,
                payload=json.dumps(event.payload, sort_keys=True),
                occurred_at=event.occurred_at.isoformat(),
            )
        )
        for handler in self._handlers:
            handler(conn, event)
        return event
