/** Kanban board state with optimistic moves.
 *
 * The cached board version always equals the last server-acknowledged one.
 * A move applies locally first; if the server reports a stale version the
 * controller silently refetches and retries once, so a concurrent move by
 * another client never forces a manual page reload. A second failure (or any
 * other error) reverts the card to the server's state and surfaces the error.
 */

import { ApiError } from "./api";
import type { Lane, MoveResult, Task } from "./types";

export interface BoardBackend {
  fetchWorkspace(wsId: string): Promise<{ board_version: number }>;
  fetchTasks(wsId: string): Promise<Task[]>;
  moveTask(taskGid: string, newStatus: Lane, expectedVersion: number): Promise<MoveResult>;
}

export type MoveOutcome = "moved" | "recovered" | "reverted";

export class BoardController {
  version = 0;
  tasks = new Map<string, Task>();
  onError: (message: string) => void = () => {};
  onChange: () => void = () => {};

  constructor(
    private backend: BoardBackend,
    private wsId: string,
  ) {}

  async load(): Promise<void> {
    const [workspace, tasks] = await Promise.all([
      this.backend.fetchWorkspace(this.wsId),
      this.backend.fetchTasks(this.wsId),
    ]);
    this.version = workspace.board_version;
    this.tasks = new Map(tasks.map((task) => [task.id, task]));
    this.onChange();
  }

  lanes(): Record<Lane, Task[]> {
    const lanes: Record<Lane, Task[]> = { ToDo: [], InProgress: [], Done: [] };
    for (const task of [...this.tasks.values()].sort((a, b) =>
      a.task_id.localeCompare(b.task_id, undefined, { numeric: true }),
    )) {
      lanes[task.status].push(task);
    }
    return lanes;
  }

  async move(taskGid: string, lane: Lane): Promise<MoveOutcome> {
    const task = this.tasks.get(taskGid);
    if (!task) throw new Error(`unknown task ${taskGid}`);

    // Optimistic: the card moves now, reconciliation follows.
    this.tasks.set(taskGid, { ...task, status: lane });
    this.onChange();

    try {
      this.acknowledge(await this.backend.moveTask(taskGid, lane, this.version));
      return "moved";
    } catch (error) {
      if (!(error instanceof ApiError) || error.code !== "E-STALE-BOARD") {
        await this.revert(error);
        return "reverted";
      }
    }

    // Stale board: someone else moved first. Refetch, retry once.
    await this.load();
    const stillThere = this.tasks.get(taskGid);
    if (!stillThere) {
      this.onError("task disappeared while moving");
      return "reverted";
    }
    this.tasks.set(taskGid, { ...stillThere, status: lane });
    this.onChange();
    try {
      this.acknowledge(await this.backend.moveTask(taskGid, lane, this.version));
      return "recovered";
    } catch (error) {
      await this.revert(error);
      return "reverted";
    }
  }

  private acknowledge(result: MoveResult): void {
    this.version = result.board_version;
    this.tasks.set(result.task.id, result.task);
    this.onChange();
  }

  private async revert(error: unknown): Promise<void> {
    await this.load(); // the card snaps back to the server's truth
    this.onError(error instanceof Error ? error.message : String(error));
  }
}
