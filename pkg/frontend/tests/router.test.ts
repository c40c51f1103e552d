import { describe, expect, it } from "vitest";

import { Router } from "../src/router";

describe("hash router", () => {
  it("dispatches parameterized routes", () => {
    const seen: Array<[string, Record<string, string>]> = [];
    const router = new Router()
      .on("/", () => {
        seen.push(["home", {}]);
      })
      .on("/orgs/:orgId/analytics", (params) => {
        seen.push(["analytics", params]);
      })
      .on("/workspaces/:wsId", (params) => {
        seen.push(["ws", params]);
      });
    router.dispatch("#/");
    router.dispatch("#/orgs/org-7/analytics");
    router.dispatch("#/workspaces/ws-2");
    expect(seen).toEqual([
      ["home", {}],
      ["analytics", { orgId: "org-7" }],
      ["ws", { wsId: "ws-2" }],
    ]);
  });

  it("falls back on unknown paths", () => {
    let fell = false;
    const router = new Router().on("/", () => {});
    router.fallback = () => {
      fell = true;
    };
    router.dispatch("#/nowhere/at/all");
    expect(fell).toBe(true);
  });
});
