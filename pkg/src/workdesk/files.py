"""Versioned file storage scoped to an organization or workspace.

Every upload is a new immutable version (no content dedup); version numbers
are contiguous from 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Callable

from sqlalchemy import func, insert, select

from . import storage
from .authz import Scope, require
from .errors import DomainError, E_NO_SUCH_FILE, E_NO_SUCH_VERSION


@dataclass(frozen=True)
class StoredFileInfo:
    file_id: str
    scope: Scope
    name: str
    latest_version: int


class FileService:
    def __init__(self, db: storage.Database, clock: Callable[[], datetime]):
        self.db = db
        self.clock = clock

    def upload(self, actor: str, scope: Scope, name: str, content: bytes) -> StoredFileInfo:
        with self.db.transaction() as conn:
            require(conn, actor, scope, "upload_file")
            row = conn.execute(
                select(storage.files).where(
                    storage.files.c.scope_kind == scope.kind,
                    storage.files.c.scope_id == scope.id,
                    storage.files.c.name == name,
                )
            ).first()
            if row is None:
                file_id = self.db.new_id(conn, "file")
                conn.execute(
                    insert(storage.files).values(
                        id=file_id, scope_kind=scope.kind, scope_id=scope.id, name=name
                    )
                )
                next_version = 1
            else:
                file_id = row.id
                latest = conn.execute(
                    select(func.max(storage.file_versions.c.version_no)).where(
                        storage.file_versions.c.file_id == file_id
                    )
                ).scalar()
                next_version = (latest or 0) + 1
            conn.execute(
                insert(storage.file_versions).values(
                    file_id=file_id,
                    version_no=next_version,
                    content=content,
                    uploaded_by=actor,
                    uploaded_at=self.clock().isoformat(),
                )
            )
            return StoredFileInfo(file_id, scope, name, next_version)

    def download(self, actor: str, file_id: str, version: int | None = None) -> bytes:
        with self.db.transaction() as conn:
            info = self._file_row(conn, file_id)
            require(conn, actor, Scope(info.scope_kind, info.scope_id), "download_file")
            query = select(storage.file_versions).where(
                storage.file_versions.c.file_id == file_id
            )
            if version is None:
                query = query.order_by(storage.file_versions.c.version_no.desc()).limit(1)
            else:
                query = query.where(storage.file_versions.c.version_no == version)
            row = conn.execute(query).first()
            if row is None:
                raise DomainError(
                    E_NO_SUCH_VERSION, f"file {file_id} has no version {version}"
                )
            return row.content

    def info(self, actor: str, file_id: str) -> StoredFileInfo:
        with self.db.transaction() as conn:
            row = self._file_row(conn, file_id)
            scope = Scope(row.scope_kind, row.scope_id)
            require(conn, actor, scope, "download_file")
            latest = conn.execute(
                select(func.max(storage.file_versions.c.version_no)).where(
                    storage.file_versions.c.file_id == file_id
                )
            ).scalar()
            return StoredFileInfo(file_id, scope, row.name, latest or 0)

    def list_files(self, actor: str, scope: Scope) -> list[StoredFileInfo]:
        with self.db.transaction() as conn:
            require(conn, actor, scope, "download_file")
            rows = conn.execute(
                select(storage.files)
                .where(
                    storage.files.c.scope_kind == scope.kind,
                    storage.files.c.scope_id == scope.id,
                )
                .order_by(storage.files.c.id)
            ).all()
            out = []
            for row in rows:
                latest = conn.execute(
                    select(func.max(storage.file_versions.c.version_no)).where(
                        storage.file_versions.c.file_id == row.id
                    )
                ).scalar()
                out.append(StoredFileInfo(row.id, scope, row.name, latest or 0))
            return out

    def _file_row(self, conn, file_id: str):
        row = conn.execute(select(storage.files).where(storage.files.c.id == file_id)).first()
        if row is None:
            raise DomainError(E_NO_SUCH_FILE, f"no file {file_id}")
        return row
