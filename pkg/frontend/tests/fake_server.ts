/** In-memory stand-in for the board routes with the same compare-and-set
 * contract the service enforces: a stale expected version changes nothing. */

import { ApiError } from "../src/api";
import type { BoardBackend } from "../src/board";
import type { Lane, MoveResult, Task } from "../src/types";

export function makeTask(gid: string, taskId: string, status: Lane = "ToDo"): Task {
  return {
    id: gid,
    task_id: taskId,
    ws_id: "ws-1",
    sprint_id: null,
    name: `Task ${taskId}`,
    description: null,
    item_type: "Feature",
    priority: "Medium",
    assignees: [],
    planned_effort: 4,
    status,
    completed_at: null,
  };
}

export class FakeBoardServer {
  version = 0;
  tasks = new Map<string, Task>();
  moveCalls = 0;
  failNext: string | null = null;

  constructor(tasks: Task[]) {
    for (const task of tasks) this.tasks.set(task.id, { ...task });
  }

  /** One client's view of the server. */
  client(options: { latencyOrder?: string[] } = {}): BoardBackend {
    void options;
    return {
      fetchWorkspace: async () => ({ board_version: this.version }),
      fetchTasks: async () => [...this.tasks.values()].map((task) => ({ ...task })),
      moveTask: async (gid: string, status: Lane, expected: number): Promise<MoveResult> => {
        this.moveCalls += 1;
        if (this.failNext) {
          const code = this.failNext;
          this.failNext = null;
          throw new ApiError(422, code, "injected failure");
        }
        if (expected !== this.version) {
          throw new ApiError(409, "E-STALE-BOARD", "board changed; refetch and retry");
        }
        const task = this.tasks.get(gid);
        if (!task) throw new ApiError(404, "E-NO-SUCH-TASK", `no task ${gid}`);
        this.version += 1;
        const updated = {
          ...task,
          status,
          completed_at: status === "Done" ? "2022-09-15T12:00:00+00:00" : null,
        };
        this.tasks.set(gid, updated);
        return { task: { ...updated }, board_version: this.version };
      },
    };
  }

  lanesSnapshot(): Record<string, string> {
    const snapshot: Record<string, string> = {};
    for (const [gid, task] of this.tasks) snapshot[gid] = task.status;
    return snapshot;
  }
}
