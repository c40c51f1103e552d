/** Live notification feed: NDJSON stream with polling fallback.
 *
 * Rows dedup by notification id, so a stream reconnect (which may replay)
 * never duplicates entries. When the stream drops, a 30-second poll loop
 * keeps the badge honest until the next connect attempt succeeds.
 */

import type { AppNotification } from "./types";

export const POLL_INTERVAL_MS = 30_000;

export type LineSource = () => Promise<AsyncIterable<string>>;

export interface FeedBackend {
  fetchAll(): Promise<AppNotification[]>;
  act(id: string, decision: "Accept" | "Reject"): Promise<unknown>;
}

export class NotificationCenter {
  items: AppNotification[] = [];
  private seen = new Set<string>();
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  onChange: () => void = () => {};

  constructor(
    private backend: FeedBackend,
    private lineSource: LineSource | null = null,
    private schedule: (fn: () => void, ms: number) => ReturnType<typeof setTimeout> = setTimeout,
  ) {}

  get unreadCount(): number {
    return this.items.filter((n) => !n.read).length;
  }

  /** Add one notification; returns false for duplicates (dedup by id). */
  ingest(notification: AppNotification): boolean {
    if (this.seen.has(notification.id)) return false;
    this.seen.add(notification.id);
    this.items.unshift(notification);
    this.items.sort((a, b) =>
      a.created_at === b.created_at
        ? b.id.localeCompare(a.id, undefined, { numeric: true })
        : b.created_at.localeCompare(a.created_at),
    );
    this.onChange();
    return true;
  }

  replace(batch: AppNotification[]): void {
    for (const notification of batch) {
      const existing = this.items.findIndex((n) => n.id === notification.id);
      if (existing >= 0) this.items[existing] = notification;
      else {
        this.seen.add(notification.id);
        this.items.push(notification);
      }
    }
    this.items.sort((a, b) =>
      a.created_at === b.created_at
        ? b.id.localeCompare(a.id, undefined, { numeric: true })
        : b.created_at.localeCompare(a.created_at),
    );
    this.onChange();
  }

  async refresh(): Promise<void> {
    this.replace(await this.backend.fetchAll());
  }

  async act(id: string, decision: "Accept" | "Reject"): Promise<void> {
    await this.backend.act(id, decision);
    const row = this.items.find((n) => n.id === id);
    if (row) {
      row.read = true;
      row.actionable = false;
    }
    this.onChange();
  }

  /** Run the stream until stop(); on drop, poll until reconnect succeeds. */
  async run(): Promise<void> {
    this.stopped = false;
    while (!this.stopped) {
      if (!this.lineSource) {
        await this.pollOnce();
        await this.sleep(POLL_INTERVAL_MS);
        continue;
      }
      try {
        const lines = await this.lineSource();
        for await (const line of lines) {
          if (this.stopped) return;
          if (!line.trim()) continue;
          this.ingest(JSON.parse(line) as AppNotification);
        }
      } catch {
        /* stream dropped; fall through to polling */
      }
      if (this.stopped) return;
      await this.pollOnce(); // silent fallback keeps the badge fresh
      await this.sleep(POLL_INTERVAL_MS);
    }
  }

  private async pollOnce(): Promise<void> {
    try {
      await this.refresh();
    } catch {
      /* offline; next cycle retries */
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.pollTimer) clearTimeout(this.pollTimer);
  }

  private sleep(ms: number): Promise<void> {
    return new Promise((resolve) => {
      this.pollTimer = this.schedule(resolve, ms);
    });
  }
}

/** Production line source: long-poll the NDJSON stream endpoint. */
export function httpLineSource(baseUrl: string, token: string): LineSource {
  return async () => {
    const response = await fetch(`${baseUrl}/notifications/stream?timeout_s=60`, {
      headers: { Authorization: `Bearer ${token}` },
    });
    if (!response.ok || !response.body) throw new Error(`stream failed: ${response.status}`);
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    return (async function* () {
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let newline = buffer.indexOf("\n");
        while (newline >= 0) {
          yield buffer.slice(0, newline);
          buffer = buffer.slice(newline + 1);
          newline = buffer.indexOf("\n");
        }
      }
    })();
  };
}
