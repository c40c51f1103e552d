import { beforeEach, describe, expect, it } from "vitest";

import { BoardController } from "../src/board";
import { renderBoard } from "../src/views";
import { FakeBoardServer, makeTask } from "./fake_server";

describe("optimistic board moves", () => {
  let server: FakeBoardServer;

  beforeEach(() => {
    server = new FakeBoardServer([makeTask("task-1", "T-1"), makeTask("task-2", "T-2")]);
  });

  it("applies a clean move and acknowledges the new version", async () => {
    const board = new BoardController(server.client(), "ws-1");
    await board.load();
    const outcome = await board.move("task-1", "InProgress");
    expect(outcome).toBe("moved");
    expect(board.version).toBe(1);
    expect(board.tasks.get("task-1")!.status).toBe("InProgress");
    expect(server.lanesSnapshot()["task-1"]).toBe("InProgress");
  });

  it("two clients race: the loser auto-recovers without a manual reload", async () => {
    // Both clients load the same board version, then both move.
    const clientA = new BoardController(server.client(), "ws-1");
    const clientB = new BoardController(server.client(), "ws-1");
    await clientA.load();
    await clientB.load();
    expect(clientA.version).toBe(0);
    expect(clientB.version).toBe(0);

    const first = await clientB.move("task-2", "Done"); // B wins the race
    expect(first).toBe("moved");

    const second = await clientA.move("task-1", "InProgress"); // A is stale now
    expect(second).toBe("recovered"); // silent refetch + one retry, no reload

    // The recovered client converges on the server's truth, including B's move.
    expect(clientA.version).toBe(server.version);
    expect(clientA.tasks.get("task-1")!.status).toBe("InProgress");
    expect(clientA.tasks.get("task-2")!.status).toBe("Done");
    expect(server.lanesSnapshot()).toEqual({ "task-1": "InProgress", "task-2": "Done" });
  });

  it("persistent failure reverts the card to the server lane and surfaces", async () => {
    const board = new BoardController(server.client(), "ws-1");
    const errors: string[] = [];
    board.onError = (message) => errors.push(message);
    await board.load();
    server.failNext = "E-FORBIDDEN";
    const outcome = await board.move("task-1", "Done");
    expect(outcome).toBe("reverted");
    expect(board.tasks.get("task-1")!.status).toBe("ToDo"); // snapped back
    expect(errors).toHaveLength(1);
    expect(server.lanesSnapshot()["task-1"]).toBe("ToDo");
  });

  it("double staleness also reverts instead of looping", async () => {
    const clientA = new BoardController(server.client(), "ws-1");
    const saboteur = new BoardController(server.client(), "ws-1");
    await clientA.load();
    await saboteur.load();
    await saboteur.move("task-2", "InProgress");

    // Wrap the backend so the retry also races and loses.
    const backend = server.client();
    const raced = {
      ...backend,
      moveTask: async (gid: string, status: never, expected: number) => {
        if (expected !== server.version) {
          return backend.moveTask(gid, status, expected); // stale -> throws
        }
        await saboteur.load();
        await saboteur.move("task-2", "Done"); // bump version under our feet
        return backend.moveTask(gid, status, expected);
      },
    };
    const errors: string[] = [];
    const client = new BoardController(raced as typeof backend, "ws-1");
    client.onError = (message) => errors.push(message);
    await client.load();
    const outcome = await client.move("task-1", "Done");
    expect(outcome).toBe("reverted");
    expect(errors).toHaveLength(1);
    expect(client.version).toBe(server.version);
    expect(client.tasks.get("task-1")!.status).toBe(server.lanesSnapshot()["task-1"]);
  });

  it("cached version always equals the last server-acknowledged one", async () => {
    const board = new BoardController(server.client(), "ws-1");
    await board.load();
    for (const [gid, lane] of [
      ["task-1", "InProgress"],
      ["task-2", "InProgress"],
      ["task-1", "Done"],
    ] as const) {
      await board.move(gid, lane);
      expect(board.version).toBe(server.version);
    }
  });

  it("renders three lanes and draggable cards", async () => {
    const board = new BoardController(server.client(), "ws-1");
    await board.load();
    const host = document.createElement("div");
    renderBoard(host, board);
    const lanes = host.querySelectorAll(".lane");
    expect(lanes).toHaveLength(3);
    expect([...lanes].map((lane) => lane.getAttribute("data-lane"))).toEqual([
      "ToDo",
      "InProgress",
      "Done",
    ]);
    expect(host.querySelectorAll(".task-card[draggable=true]")).toHaveLength(2);
    expect(host.getAttribute("data-version")).toBe("0");
  });
});
