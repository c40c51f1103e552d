"""Service configuration: JSON file, overridden by WORKDESK_* environment vars."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class AppConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8400
    storage_url: str = "sqlite:///workdesk.db"
    deadline_threshold_days: int = 7
    hash_log2_n: int = 14
    admin_emails: list[str] = field(default_factory=list)


ENV_PREFIX = "WORKDESK_"

_FIELDS = {
    "listen_host": str,
    "listen_port": int,
    "storage_url": str,
    "deadline_threshold_days": int,
    "hash_log2_n": int,
    "admin_emails": list,
}


def load_config(path: str | Path | None = None, env: dict | None = None) -> AppConfig:
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
    config = AppConfig()
    for name, cast in _FIELDS.items():
        if name in data:
            setattr(config, name, data[name] if cast is list else cast(data[name]))
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            raw = env[env_key]
            if cast is list:
                setattr(config, name, [part.strip() for part in raw.split(",") if part.strip()])
            else:
                setattr(config, name, cast(raw))
    return config
