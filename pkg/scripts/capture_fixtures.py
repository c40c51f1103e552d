"""Record seeded-wire payloads for the frontend test suite.

Boots the backend in process, seeds the demo fixture, and saves the JSON the
HTTP surface serves, so the UI tests consume the real wire format without a
running server. Regenerate after changing the fixture or the payload shapes:

    python scripts/capture_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from workdesk.api import create_app
from workdesk.backend import Backend
from workdesk.config import AppConfig
from workdesk.seed import DEMO_PASSWORD, seed
from workdesk.storage import Database

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"


def main() -> None:
    db = Database("sqlite://")
    db.migrate()
    backend = Backend(db, AppConfig(hash_log2_n=10))
    ids = seed(backend)
    app = create_app(backend)
    client = TestClient(app)
    token = client.post(
        "/auth/login", json={"email": "ana@bier.example", "password": DEMO_PASSWORD}
    ).json()["token"]
    headers = {"Authorization": f"Bearer {token}"}

    org_id = ids["org_id"]
    lp = ids["workspaces"]["Loan Portal"]
    sprints = client.get(f"/workspaces/{lp}/sprints", headers=headers).json()
    sprint1 = next(s for s in sprints if s["name"] == "Sprint 1")

    captures = {
        "org_analytics.json": client.get(f"/orgs/{org_id}/analytics", headers=headers).json(),
        "org_summary.json": client.get(f"/orgs/{org_id}/summary", headers=headers).json(),
        "workspace_analytics.json": client.get(
            f"/workspaces/{lp}/analytics", headers=headers
        ).json(),
        "sprint_burndown.json": client.get(
            f"/sprints/{sprint1['id']}/burndown", headers=headers
        ).json(),
        "sprint_stats.json": client.get(
            f"/sprints/{sprint1['id']}/stats", headers=headers
        ).json(),
        "workspace_tasks.json": client.get(f"/workspaces/{lp}/tasks", headers=headers).json(),
        "notifications.json": _grace_feed(client),
    }
    OUT.mkdir(parents=True, exist_ok=True)
    for name, payload in captures.items():
        (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {OUT / name}")


def _grace_feed(client):
    token = client.post(
        "/auth/login", json={"email": "grace@bier.example", "password": DEMO_PASSWORD}
    ).json()["token"]
    return client.get("/notifications", headers={"Authorization": f"Bearer {token}"}).json()


if __name__ == "__main__":
    main()
