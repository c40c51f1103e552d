"""User accounts, password hashing, and bearer sessions."""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Callable

from sqlalchemy import delete, insert, select
from sqlalchemy.engine import Connection
from sqlalchemy.exc import IntegrityError

from . import storage
from .errors import (
    DomainError,
    E_BAD_EMAIL,
    E_EMAIL_TAKEN,
    E_FORBIDDEN,
    E_NO_SUCH_USER,
    E_UNAUTHENTICATED,
    E_WEAK_PASSWORD,
)

MIN_PASSWORD_LENGTH = 8
SESSION_TTL = timedelta(hours=24)


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    email: str
    display_name: str


def normalize_email(email: str) -> str:
    """Case-fold and validate: exactly one '@' with nonempty local and domain."""
    value = email.strip().lower()
    local, sep, domain = value.partition("@")
    if not sep or not local or not domain or "@" in domain:
        raise DomainError(E_BAD_EMAIL, f"not a valid email address: {email!r}", field="email")
    return value


def hash_password(password: str, log2_n: int = 14) -> str:
    """Salted scrypt hash, self-describing: scrypt$log2n$r$p$salt$digest."""
    salt = secrets.token_bytes(16)
    r, p = 8, 1
    digest = hashlib.scrypt(password.encode(), salt=salt, n=2**log2_n, r=r, p=p)
    return f"scrypt${log2_n}${r}${p}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, log2_n, r, p, salt_hex, digest_hex = stored.split("$")
        if scheme != "scrypt":
            return False
        digest = hashlib.scrypt(
            password.encode(),
            salt=bytes.fromhex(salt_hex),
            n=2 ** int(log2_n),
            r=int(r),
            p=int(p),
        )
        return hmac.compare_digest(digest.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


class IdentityService:
    def __init__(
        self,
        db: storage.Database,
        clock: Callable[[], datetime],
        hash_log2_n: int = 14,
        token_factory: Callable[[], str] | None = None,
    ):
        self.db = db
        self.clock = clock
        self.hash_log2_n = hash_log2_n
        self.token_factory = token_factory or (lambda: secrets.token_urlsafe(32))

    def register_user(self, email: str, display_name: str, password: str) -> UserAccount:
        email = normalize_email(email)
        if len(password) < MIN_PASSWORD_LENGTH:
            raise DomainError(
                E_WEAK_PASSWORD,
                f"password must be at least {MIN_PASSWORD_LENGTH} characters",
                field="password",
            )
        with self.db.transaction() as conn:
            if self._by_email(conn, email) is not None:
                raise DomainError(E_EMAIL_TAKEN, f"{email} is already registered", field="email")
            user_id = self.db.new_id(conn, "usr")
            try:
                conn.execute(
                    insert(storage.users).values(
                        id=user_id,
                        email=email,
                        display_name=display_name,
                        credential_hash=hash_password(password, self.hash_log2_n),
                        created_at=self.clock().isoformat(),
                    )
                )
            except IntegrityError:
                raise DomainError(E_EMAIL_TAKEN, f"{email} is already registered", field="email")
            return UserAccount(user_id, email, display_name)

    def login(self, email: str, password: str) -> str:
        """Verify credentials and mint a bearer token."""
        email = normalize_email(email)
        with self.db.transaction() as conn:
            row = self._by_email(conn, email)
            if row is None or not verify_password(password, row.credential_hash):
                raise DomainError(E_FORBIDDEN, "invalid credentials")
            token = self.token_factory()
            conn.execute(
                insert(storage.sessions).values(
                    token=token,
                    user_id=row.id,
                    expires_at=(self.clock() + SESSION_TTL).isoformat(),
                )
            )
            return token

    def authenticate(self, token: str) -> UserAccount:
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.sessions).where(storage.sessions.c.token == token)
            ).first()
            if row is None or datetime.fromisoformat(row.expires_at) <= self.clock():
                raise DomainError(E_UNAUTHENTICATED, "missing, expired, or revoked session")
            return self.get_user(row.user_id)

    def revoke_session(self, token: str) -> None:
        with self.db.transaction() as conn:
            conn.execute(delete(storage.sessions).where(storage.sessions.c.token == token))

    def get_user(self, user_id: str) -> UserAccount:
        with self.db.transaction() as conn:
            row = conn.execute(
                select(storage.users).where(storage.users.c.id == user_id)
            ).first()
            if row is None:
                raise DomainError(E_NO_SUCH_USER, f"no user {user_id}")
            return UserAccount(row.id, row.email, row.display_name)

    def find_by_email(self, email: str) -> UserAccount | None:
        email = normalize_email(email)
        with self.db.transaction() as conn:
            row = self._by_email(conn, email)
            return UserAccount(row.id, row.email, row.display_name) if row else None

    @staticmethod
    def _by_email(conn: Connection, email: str):
        return conn.execute(
            select(storage.users).where(storage.users.c.email == email)
        ).first()
