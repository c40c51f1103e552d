/** Thin typed client over the backend JSON routes; bearer-token auth. */

import type {
  AppNotification,
  BacklogItem,
  ChartSeries,
  MoveResult,
  Organization,
  Sprint,
  SprintStats,
  Task,
  Workspace,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public field: string | null = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  token: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetcher: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let payload: BodyInit | undefined;
    if (body instanceof FormData) {
      payload = body;
    } else if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetcher(this.baseUrl + path, { method, headers, body: payload });
    if (!response.ok) {
      let code = "E-UNKNOWN";
      let message = response.statusText;
      let field: string | null = null;
      try {
        const parsed = await response.json();
        code = parsed.error?.code ?? code;
        message = parsed.error?.message ?? message;
        field = parsed.error?.field ?? null;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, code, message, field);
    }
    const contentType = response.headers.get("content-type") ?? "";
    if (contentType.includes("json")) return (await response.json()) as T;
    return (await response.text()) as unknown as T;
  }

  get<T>(path: string): Promise<T> {
    return this.request<T>("GET", path);
  }
  post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>("POST", path, body);
  }
  patch<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>("PATCH", path, body);
  }
  put<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>("PUT", path, body);
  }

  // -- auth ------------------------------------------------------------

  async register(email: string, displayName: string, password: string): Promise<void> {
    await this.post("/auth/register", { email, display_name: displayName, password });
  }

  async login(email: string, password: string): Promise<void> {
    const { token } = await this.post<{ token: string }>("/auth/login", { email, password });
    this.token = token;
  }

  // -- orgs and workspaces ------------------------------------------------

  listOrgs(): Promise<Organization[]> {
    return this.get("/orgs");
  }
  orgSummary(orgId: string): Promise<Record<string, unknown>> {
    return this.get(`/orgs/${orgId}/summary`);
  }
  orgAnalytics(orgId: string): Promise<{ series: ChartSeries[] }> {
    return this.get(`/orgs/${orgId}/analytics`);
  }
  listWorkspaces(orgId: string): Promise<Workspace[]> {
    return this.get(`/orgs/${orgId}/workspaces`);
  }
  getWorkspace(wsId: string): Promise<Workspace> {
    return this.get(`/workspaces/${wsId}`);
  }
  workspaceAnalytics(wsId: string): Promise<Record<string, ChartSeries>> {
    return this.get(`/workspaces/${wsId}/analytics`);
  }
  updateWorkspace(wsId: string, patch: Partial<Workspace>): Promise<Workspace> {
    return this.patch(`/workspaces/${wsId}`, patch);
  }
  updateOrg(orgId: string, patch: Partial<Organization>): Promise<Organization> {
    return this.patch(`/orgs/${orgId}`, patch);
  }

  // -- work ---------------------------------------------------------------

  listBacklog(wsId: string): Promise<BacklogItem[]> {
    return this.get(`/workspaces/${wsId}/backlog`);
  }
  listSprints(wsId: string, state?: "active" | "closed"): Promise<Sprint[]> {
    const query = state ? `?state=${state}` : "";
    return this.get(`/workspaces/${wsId}/sprints${query}`);
  }
  sprintTasks(sprintId: string): Promise<Task[]> {
    return this.get(`/sprints/${sprintId}/tasks`);
  }
  listTasks(wsId: string): Promise<Task[]> {
    return this.get(`/workspaces/${wsId}/tasks?limit=500`);
  }
  moveTask(taskGid: string, newStatus: string, expectedVersion: number): Promise<MoveResult> {
    return this.patch(`/tasks/${taskGid}/move`, {
      new_status: newStatus,
      expected_board_version: expectedVersion,
    });
  }
  sprintBurndown(sprintId: string): Promise<ChartSeries> {
    return this.get(`/sprints/${sprintId}/burndown`);
  }
  sprintCumulative(sprintId: string): Promise<ChartSeries> {
    return this.get(`/sprints/${sprintId}/actual-cumulative`);
  }
  sprintStats(sprintId: string): Promise<SprintStats> {
    return this.get(`/sprints/${sprintId}/stats`);
  }
  createSprint(wsId: string, name: string, start: string, end: string): Promise<Sprint> {
    return this.post(`/workspaces/${wsId}/sprints`, { name, start, end });
  }

  // -- notifications ---------------------------------------------------------

  listNotifications(unreadOnly = false): Promise<AppNotification[]> {
    return this.get(`/notifications${unreadOnly ? "?unread=1" : ""}`);
  }
  actOnNotification(id: string, decision: "Accept" | "Reject"): Promise<unknown> {
    return this.post(`/notifications/${id}/act`, { decision });
  }
}
