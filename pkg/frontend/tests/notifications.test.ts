import { describe, expect, it } from "vitest";

import { NotificationCenter } from "../src/notifications";
import { renderNotificationBar } from "../src/notification_bar";
import type { AppNotification } from "../src/types";
import feedFixture from "./fixtures/notifications.json";

function makeNotification(id: string, overrides: Partial<AppNotification> = {}): AppNotification {
  return {
    id,
    kind: "InviteCreated",
    payload: { invite_id: `inv-${id}`, scope_kind: "org", scope_id: "org-1", offered_role: "Member" },
    read: false,
    created_at: `2022-09-15T12:00:${id.padStart(2, "0")}+00:00`,
    actionable: true,
    ...overrides,
  };
}

function makeCenter(backend: Partial<ConstructorParameters<typeof NotificationCenter>[0]> = {}) {
  return new NotificationCenter({
    fetchAll: backend.fetchAll ?? (async () => []),
    act: backend.act ?? (async () => ({})),
  });
}

describe("notification center", () => {
  it("dedups by id so stream reconnect replays add nothing", () => {
    const center = makeCenter();
    expect(center.ingest(makeNotification("1"))).toBe(true);
    expect(center.ingest(makeNotification("2"))).toBe(true);
    // reconnect replays both rows
    expect(center.ingest(makeNotification("1"))).toBe(false);
    expect(center.ingest(makeNotification("2"))).toBe(false);
    expect(center.items).toHaveLength(2);
  });

  it("badge equals the unread count and updates live", () => {
    const center = makeCenter();
    const header = document.createElement("div");
    renderNotificationBar(header, center);
    const badge = header.querySelector("#notif-badge")!;
    expect(badge.textContent).toBe("0");
    center.ingest(makeNotification("1"));
    center.ingest(makeNotification("2", { read: true }));
    expect(badge.textContent).toBe("1");
    expect(header.querySelectorAll(".notif-row")).toHaveLength(2);
  });

  it("feed stays newest-first after any ingest order", () => {
    const center = makeCenter();
    center.ingest(makeNotification("2"));
    center.ingest(makeNotification("3"));
    center.ingest(makeNotification("1"));
    expect(center.items.map((n) => n.id)).toEqual(["3", "2", "1"]);
  });

  it("inline accept marks the row read and non-actionable", async () => {
    const acted: string[] = [];
    const center = makeCenter({
      act: async (id, decision) => {
        acted.push(`${id}:${decision}`);
        return {};
      },
    });
    const header = document.createElement("div");
    renderNotificationBar(header, center);
    center.ingest(makeNotification("7"));
    const accept = header.querySelector<HTMLButtonElement>(".notif-row .accept")!;
    accept.click();
    await Promise.resolve();
    expect(acted).toEqual(["7:Accept"]);
    expect(center.items[0]!.read).toBe(true);
    expect(center.items[0]!.actionable).toBe(false);
    expect(header.querySelector(".notif-row.read")).not.toBeNull();
    expect(header.querySelector(".notif-row .accept")).toBeNull();
  });

  it("stream drop falls back to polling and recovers the feed", async () => {
    const polled: number[] = [];
    let pollCount = 0;
    const center = new NotificationCenter(
      {
        fetchAll: async () => {
          pollCount += 1;
          polled.push(pollCount);
          return [makeNotification("9")];
        },
        act: async () => ({}),
      },
      // A stream that dies immediately on every connect.
      async () => {
        throw new Error("connection refused");
      },
      // Instant scheduler so the test does not wait 30s between cycles.
      (fn) => {
        if (pollCount < 3) fn();
        return 0 as unknown as ReturnType<typeof setTimeout>;
      },
    );
    const run = center.run();
    await new Promise((resolve) => setTimeout(resolve, 10));
    center.stop();
    await Promise.race([run, new Promise((resolve) => setTimeout(resolve, 20))]);
    expect(pollCount).toBeGreaterThanOrEqual(2); // silent 30s polling kicked in
    expect(center.items.map((n) => n.id)).toEqual(["9"]); // deduped across polls
  });

  it("renders the seeded wire fixture rows", () => {
    const center = makeCenter();
    const header = document.createElement("div");
    renderNotificationBar(header, center);
    center.replace(feedFixture as AppNotification[]);
    const rows = header.querySelectorAll(".notif-row");
    expect(rows.length).toBe((feedFixture as AppNotification[]).length);
    expect(rows[0]!.getAttribute("data-kind")).toBe("InviteCreated");
    expect(header.querySelector(".notif-row .accept")).not.toBeNull();
  });
});
