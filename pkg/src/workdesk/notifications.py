"""Notification fan-out, the deadline scan, the feed, and the live stream hub.

Delivery is exactly-once per cause: every notification carries a dedup key
(event id + recipient, or workspace + member + calendar day for deadline
alerts) backed by a unique index, so replaying an event or re-running a scan
adds nothing. Invitees without an account get an email-channel record in the
outbox table instead of an in-app notification; actual SMTP delivery is a
pluggable concern outside this module.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass
from datetime import date, datetime
from typing import Callable

from sqlalchemy import insert, select, update
from sqlalchemy.engine import Connection
from sqlalchemy.exc import IntegrityError

from . import events, storage
from .errors import (
    DomainError,
    E_NO_SUCH_NOTIFICATION,
    E_NOT_ACTIONABLE,
    E_UNKNOWN_KIND,
)
from .identity import IdentityService
from .tenancy import TenancyService, WorkspaceStatus


@dataclass(frozen=True)
class Notification:
    notif_id: str
    recipient: str
    kind: str
    payload: dict
    read: bool
    created_at: datetime

    def to_dict(self) -> dict:
        return {
            "id": self.notif_id,
            "recipient": self.recipient,
            "kind": self.kind,
            "payload": dict(self.payload),
            "read": self.read,
            "created_at": self.created_at.isoformat(),
            "actionable": self.kind == events.INVITE_CREATED,
        }


class NotificationHub:
    """In-process pub/sub for the live feed; one queue per open stream."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: dict[str, list[queue.Queue]] = {}

    def subscribe(self, user_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.setdefault(user_id, []).append(q)
        return q

    def unsubscribe(self, user_id: str, q: queue.Queue) -> None:
        with self._lock:
            queues = self._subscribers.get(user_id, [])
            if q in queues:
                queues.remove(q)

    def publish(self, user_id: str, payload: dict) -> None:
        with self._lock:
            queues = list(self._subscribers.get(user_id, []))
        for q in queues:
            q.put(payload)


class NotificationService:
    def __init__(
        self,
        db: storage.Database,
        identity: IdentityService,
        tenancy: TenancyService,
        clock: Callable[[], datetime],
        hub: NotificationHub | None = None,
        deadline_threshold_days: int = 7,
    ):
        self.db = db
        self.identity = identity
        self.tenancy = tenancy
        self.clock = clock
        self.hub = hub or NotificationHub()
        self.deadline_threshold_days = deadline_threshold_days

    # -- event intake -------------------------------------------------------

    def handle_event(self, conn: Connection, event: events.DomainEvent) -> None:
        """EventBus subscriber: runs inside the emitting transaction."""
        self.publish_event(event, conn=conn)

    def publish_event(self, event: events.DomainEvent, conn: Connection | None = None) -> int:
        if event.kind not in events.EVENT_KINDS:
            raise DomainError(E_UNKNOWN_KIND, f"unrecognized event kind {event.kind!r}")
        if conn is not None:
            return self._fan_out(conn, event)
        with self.db.transaction() as inner:
            return self._fan_out(inner, event)

    def _fan_out(self, conn: Connection, event: events.DomainEvent) -> int:
        payload = event.payload
        created = 0
        if event.kind == events.INVITE_CREATED:
            invitee_user = payload.get("invitee_user_id")
            if invitee_user:
                created += self._notify(
                    conn,
                    recipient=invitee_user,
                    kind=event.kind,
                    payload=payload,
                    dedup_key=f"event:{event.event_id}:{invitee_user}",
                )
            elif payload.get("invitee_email"):
                created += self._email(
                    conn,
                    to_email=payload["invitee_email"],
                    subject="You have been invited",
                    body=(
                        "You were invited to join a shared space. "
                        "Register an account, then open: "
                        f"/invites/{payload.get('token', '')}/accept"
                    ),
                    dedup_key=f"event:{event.event_id}:email",
                )
        elif event.kind in (events.INVITE_ACCEPTED, events.INVITE_REJECTED):
            inviter = payload.get("inviter")
            if inviter:
                created += self._notify(
                    conn,
                    recipient=inviter,
                    kind=event.kind,
                    payload=payload,
                    dedup_key=f"event:{event.event_id}:{inviter}",
                )
        elif event.kind == events.IMPORT_COMPLETED:
            ws_id = payload.get("ws_id", "")
            actor = payload.get("actor")
            members = conn.execute(
                select(storage.memberships.c.user_id).where(
                    storage.memberships.c.scope_kind == "ws",
                    storage.memberships.c.scope_id == ws_id,
                )
            ).all()
            for member in sorted({m.user_id for m in members} - {actor}):
                created += self._notify(
                    conn,
                    recipient=member,
                    kind=event.kind,
                    payload=payload,
                    dedup_key=f"event:{event.event_id}:{member}",
                )
        elif event.kind == events.DEADLINE_APPROACHING:
            recipient = payload.get("recipient")
            if recipient:
                created += self._notify(
                    conn,
                    recipient=recipient,
                    kind=event.kind,
                    payload=payload,
                    dedup_key=payload.get("dedup_key", f"event:{event.event_id}:{recipient}"),
                )
        return created

    # -- deadline scan ----------------------------------------------------------

    def deadline_scan(self, now: datetime | None = None, threshold_days: int | None = None) -> int:
        """Notify every member of an Active workspace whose planned end is
        between today and today+threshold, at most once per member per day."""
        now = now or self.clock()
        threshold = threshold_days if threshold_days is not None else self.deadline_threshold_days
        today = now.date()
        created = 0
        with self.db.transaction() as conn:
            ws_rows = conn.execute(
                select(storage.workspaces).where(
                    storage.workspaces.c.status == WorkspaceStatus.ACTIVE.value
                )
            ).all()
            for ws in sorted(ws_rows, key=lambda w: w.id):
                days_left = (date.fromisoformat(ws.planned_end) - today).days
                if not 0 <= days_left <= threshold:
                    continue
                members = conn.execute(
                    select(storage.memberships.c.user_id).where(
                        storage.memberships.c.scope_kind == "ws",
                        storage.memberships.c.scope_id == ws.id,
                    )
                ).all()
                for member in sorted({m.user_id for m in members}):
                    created += self._notify(
                        conn,
                        recipient=member,
                        kind=events.DEADLINE_APPROACHING,
                        payload={
                            "ws_id": ws.id,
                            "ws_name": ws.name,
                            "planned_end": ws.planned_end,
                            "days_left": days_left,
                        },
                        dedup_key=f"deadline:{ws.id}:{member}:{today.isoformat()}",
                    )
        return created

    # -- feed ----------------------------------------------------------------------

    def fetch(
        self,
        user_id: str,
        unread_only: bool = False,
        limit: int = 50,
        offset: int = 0,
    ) -> list[Notification]:
        with self.db.transaction() as conn:
            query = select(storage.notifications).where(
                storage.notifications.c.recipient == user_id
            )
            if unread_only:
                query = query.where(storage.notifications.c.read.is_(False))
            query = (
                query.order_by(
                    storage.notifications.c.created_at.desc(),
                    storage.notifications.c.seq.desc(),
                )
                .limit(limit)
                .offset(offset)
            )
            return [self._to_notification(row) for row in conn.execute(query)]

    def mark_read(self, user_id: str, notif_id: str) -> None:
        with self.db.transaction() as conn:
            self._owned_row(conn, user_id, notif_id)
            conn.execute(
                update(storage.notifications)
                .where(storage.notifications.c.id == notif_id)
                .values(read=True)
            )

    def act_on_notification(self, user_id: str, notif_id: str, accept: bool):
        """Resolve the invite behind an actionable notification. The read mark
        commits on its own so it survives a failing resolve (expired invite)."""
        with self.db.transaction() as conn:
            row = self._owned_row(conn, user_id, notif_id)
            if row.kind != events.INVITE_CREATED:
                raise DomainError(
                    E_NOT_ACTIONABLE, f"{row.kind} notifications take no action"
                )
            invite_id = json.loads(row.payload).get("invite_id")
        self.mark_read(user_id, notif_id)
        return self.tenancy.resolve_invitation(user_id, invite_id, accept)

    def outbox(self) -> list[dict]:
        with self.db.transaction() as conn:
            rows = conn.execute(
                select(storage.outbox_emails).order_by(storage.outbox_emails.c.id)
            ).all()
            return [
                {
                    "to": r.to_email,
                    "subject": r.subject,
                    "body": r.body,
                    "created_at": r.created_at,
                }
                for r in rows
            ]

    # -- plumbing --------------------------------------------------------------------

    def _notify(
        self, conn: Connection, recipient: str, kind: str, payload: dict, dedup_key: str
    ) -> int:
        existing = conn.execute(
            select(storage.notifications.c.id).where(
                storage.notifications.c.dedup_key == dedup_key
            )
        ).first()
        if existing is not None:
            return 0
        notif_id = self.db.new_id(conn, "ntf")
        seq = int(notif_id.split("-")[-1])
        created_at = self.clock()
        try:
            conn.execute(
                insert(storage.notifications).values(
                    id=notif_id,
                    seq=seq,
                    recipient=recipient,
                    kind=kind,
                    payload=json.dumps(payload, sort_keys=True),
                    read=False,
                    created_at=created_at.isoformat(),
                )
            )
            conn.execute(
                update(storage.notifications)
                .where(storage.notifications.c.id == notif_id)
                .values(dedup_key=dedup_key)
            )
        except IntegrityError:
            return 0
        wire = Notification(notif_id, recipient, kind, payload, False, created_at).to_dict()
        self.db.after_commit(lambda: self.hub.publish(recipient, wire))
        return 1

    def _email(
        self, conn: Connection, to_email: str, subject: str, body: str, dedup_key: str
    ) -> int:
        marker = conn.execute(
            select(storage.notifications.c.id).where(
                storage.notifications.c.dedup_key == dedup_key
            )
        ).first()
        if marker is not None:
            return 0
        # A hidden marker row keeps email fan-out idempotent per event.
        notif_id = self.db.new_id(conn, "ntf")
        conn.execute(
            insert(storage.notifications).values(
                id=notif_id,
                seq=int(notif_id.split("-")[-1]),
                recipient=f"email:{to_email}",
                kind=events.INVITE_CREATED,
                payload=json.dumps({"channel": "email"}, sort_keys=True),
                read=True,
                created_at=self.clock().isoformat(),
                dedup_key=dedup_key,
            )
        )
        conn.execute(
            insert(storage.outbox_emails).values(
                id=self.db.new_id(conn, "mail"),
                to_email=to_email,
                subject=subject,
                body=body,
                created_at=self.clock().isoformat(),
            )
        )
        return 1

    def _owned_row(self, conn: Connection, user_id: str, notif_id: str):
        row = conn.execute(
            select(storage.notifications).where(storage.notifications.c.id == notif_id)
        ).first()
        if row is None or row.recipient != user_id:
            raise DomainError(E_NO_SUCH_NOTIFICATION, f"no notification {notif_id}")
        return row

    @staticmethod
    def _to_notification(row) -> Notification:
        return Notification(
            notif_id=row.id,
            recipient=row.recipient,
            kind=row.kind,
            payload=json.loads(row.payload),
            read=bool(row.read),
            created_at=datetime.fromisoformat(row.created_at),
        )
