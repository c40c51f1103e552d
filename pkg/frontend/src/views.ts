/** Page renderers. Every page is a function of (root element, api client). */

import { ApiClient, ApiError } from "./api";
import { BoardController } from "./board";
import { renderChart } from "./charts";
import { navigate } from "./router";
import type { ChartSeries, Lane, Sprint, Task, Workspace } from "./types";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function clear(root: HTMLElement): HTMLElement {
  root.replaceChildren();
  return root;
}

function errorBanner(root: HTMLElement, error: unknown): void {
  const message = error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  root.prepend(el("div", { class: "banner error", role: "alert" }, message));
}

export function toast(message: string): void {
  const node = el("div", { class: "toast", role: "status" }, message);
  document.body.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

// -- auth ------------------------------------------------------------------

export function loginPage(root: HTMLElement, api: ApiClient, onAuthed: () => void): void {
  clear(root);
  const email = el("input", { type: "email", placeholder: "email", required: "true" });
  const password = el("input", { type: "password", placeholder: "password" });
  const name = el("input", { type: "text", placeholder: "display name (register only)" });
  const form = el(
    "form",
    { class: "card auth-form" },
    el("h1", {}, "workdesk"),
    email,
    password,
    name,
    el("button", { type: "submit" }, "Sign in"),
    el("button", { type: "button", class: "secondary", id: "register" }, "Register"),
  );
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await api.login(email.value, password.value);
      onAuthed();
    } catch (error) {
      errorBanner(root, error);
    }
  });
  form.querySelector("#register")!.addEventListener("click", async () => {
    try {
      await api.register(email.value, name.value || email.value, password.value);
      await api.login(email.value, password.value);
      onAuthed();
    } catch (error) {
      errorBanner(root, error);
    }
  });
  root.appendChild(form);
}

// -- organization pages --------------------------------------------------------

export async function orgListPage(root: HTMLElement, api: ApiClient): Promise<void> {
  clear(root);
  const orgs = await api.listOrgs();
  const list = el("div", { class: "cards" });
  for (const org of orgs) {
    const card = el(
      "article",
      { class: "card org-card" },
      el("h2", {}, org.name),
      el("p", {}, `${org.activity_type} · ${org.country}`),
      el("a", { href: `#/orgs/${org.id}` }, "Open"),
      el("a", { href: `#/orgs/${org.id}/analytics` }, "Analytics"),
    );
    list.appendChild(card);
  }
  root.appendChild(el("h1", {}, "Organizations"));
  root.appendChild(list);
}

export async function orgMainPage(root: HTMLElement, api: ApiClient, orgId: string): Promise<void> {
  clear(root);
  const summary = (await api.orgSummary(orgId)) as {
    workspaces_by_status: Record<string, number>;
    member_count: number;
    completed_tasks: number;
  };
  const workspaces = await api.listWorkspaces(orgId);
  root.appendChild(el("h1", {}, "Organization"));
  root.appendChild(
    el(
      "section",
      { class: "stats" },
      stat("Members", String(summary.member_count)),
      stat("Completed tasks", String(summary.completed_tasks)),
      ...Object.entries(summary.workspaces_by_status).map(([status, count]) =>
        stat(status, String(count)),
      ),
    ),
  );
  root.appendChild(
    el("p", {}, el("a", { href: `#/orgs/${orgId}/analytics` }, "Open analytics"),
      " · ", el("a", { href: `#/orgs/${orgId}/settings` }, "Settings")),
  );
  const table = el("div", { class: "cards" });
  for (const ws of workspaces) {
    table.appendChild(
      el(
        "article",
        { class: "card" },
        el("h2", {}, ws.name),
        el("p", {}, `${ws.process} · ${ws.status}`),
        el("a", { href: `#/workspaces/${ws.id}` }, "Open"),
      ),
    );
  }
  root.appendChild(table);
}

function stat(label: string, value: string): HTMLElement {
  return el("div", { class: "stat" }, el("strong", {}, value), el("span", {}, label));
}

export async function orgAnalyticsPage(
  root: HTMLElement,
  api: ApiClient,
  orgId: string,
): Promise<void> {
  clear(root);
  root.appendChild(el("h1", {}, "Organization analytics"));
  const { series } = await api.orgAnalytics(orgId);
  const grid = el("div", { class: "chart-grid", id: "org-charts" });
  root.appendChild(grid);
  renderSeriesList(grid, series);
}

export function renderSeriesList(grid: HTMLElement, series: ChartSeries[]): void {
  for (const payload of series) renderChart(grid, payload);
}

// -- workspace pages --------------------------------------------------------------

export async function workspacePage(
  root: HTMLElement,
  api: ApiClient,
  wsId: string,
): Promise<void> {
  clear(root);
  const ws = await api.getWorkspace(wsId);
  root.appendChild(el("h1", {}, ws.name));
  root.appendChild(
    el(
      "section",
      { class: "stats" },
      stat("Process", ws.process),
      stat("Status", ws.status),
      stat("Planned", ws.planned_cost.toFixed(2)),
      stat("Current", ws.current_cost.toFixed(2)),
      stat("Schedule", `${ws.planned_start} → ${ws.planned_end}`),
    ),
  );
  const nav = el(
    "nav",
    { class: "ws-nav" },
    el("a", { href: `#/workspaces/${wsId}/analytics` }, "Analytics"),
    el("a", { href: `#/workspaces/${wsId}/backlog` }, "Product backlog"),
    ws.process === "Scrum"
      ? el("a", { href: `#/workspaces/${wsId}/sprint` }, "Sprint backlog")
      : el("a", { href: `#/workspaces/${wsId}/board` }, "Kanban board"),
    ...(ws.process === "Scrum"
      ? [el("a", { href: `#/workspaces/${wsId}/history` }, "Sprint history")]
      : []),
    el("a", { href: `#/workspaces/${wsId}/settings` }, "Settings"),
  );
  root.appendChild(nav);
}

export async function workspaceAnalyticsPage(
  root: HTMLElement,
  api: ApiClient,
  wsId: string,
): Promise<void> {
  clear(root);
  root.appendChild(el("h1", {}, "Workspace analytics"));
  const bundle = await api.workspaceAnalytics(wsId);
  const grid = el("div", { class: "chart-grid", id: "ws-charts" });
  root.appendChild(grid);
  renderWorkspaceBundle(grid, bundle);
}

export function renderWorkspaceBundle(
  grid: HTMLElement,
  bundle: Record<string, ChartSeries>,
): void {
  const order = ["velocity", "item_status", "item_types", "sprint_participation", "member_hours"];
  for (const key of order) {
    const series = bundle[key];
    if (series) renderChart(grid, series);
  }
}

export async function backlogPage(root: HTMLElement, api: ApiClient, wsId: string): Promise<void> {
  clear(root);
  root.appendChild(el("h1", {}, "Product backlog"));
  const items = await api.listBacklog(wsId);
  const table = el(
    "table",
    { class: "data-table" },
    el(
      "tr",
      {},
      ...["ID", "Name", "Type", "Priority", "Status", "Effort"].map((h) => el("th", {}, h)),
    ),
  );
  for (const item of items) {
    table.appendChild(
      el(
        "tr",
        {},
        el("td", {}, item.item_id),
        el("td", {}, item.name),
        el("td", {}, item.item_type),
        el("td", {}, item.priority),
        el("td", {}, item.status),
        el("td", {}, String(item.effort_estimate)),
      ),
    );
  }
  root.appendChild(table);
}

/** Sprint backlog: with no active sprint this page routes to creation. */
export async function sprintBacklogPage(
  root: HTMLElement,
  api: ApiClient,
  wsId: string,
): Promise<void> {
  const active = await api.listSprints(wsId, "active");
  const sprint = active[0];
  if (!sprint) {
    navigate(`/workspaces/${wsId}/sprints/new`);
    return;
  }
  clear(root);
  root.appendChild(el("h1", {}, `Sprint backlog: ${sprint.name}`));
  root.appendChild(el("p", {}, `${sprint.start} → ${sprint.end}`));
  const tasks = await api.sprintTasks(sprint.id);
  root.appendChild(taskTable(tasks));
  const charts = el("div", { class: "chart-grid" });
  root.appendChild(charts);
  renderChart(charts, await api.sprintBurndown(sprint.id));
  renderChart(charts, await api.sprintCumulative(sprint.id));
}

export function sprintCreatePage(root: HTMLElement, api: ApiClient, wsId: string): void {
  clear(root);
  root.appendChild(el("h1", {}, "Start a sprint"));
  root.appendChild(el("p", {}, "No sprint is running; create one to open the sprint backlog."));
  const name = el("input", { placeholder: "Sprint name", value: "Sprint 1" });
  const start = el("input", { type: "date" });
  const end = el("input", { type: "date" });
  const form = el("form", { class: "card" }, name, start, end, el("button", {}, "Create"));
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await api.createSprint(wsId, name.value, start.value, end.value);
      navigate(`/workspaces/${wsId}/sprint`);
    } catch (error) {
      errorBanner(root, error);
    }
  });
  root.appendChild(form);
}

export async function sprintHistoryPage(
  root: HTMLElement,
  api: ApiClient,
  wsId: string,
): Promise<void> {
  clear(root);
  root.appendChild(el("h1", {}, "Sprint history"));
  const closed = await api.listSprints(wsId, "closed");
  for (const sprint of closed) {
    const stats = await api.sprintStats(sprint.id);
    const section = el(
      "section",
      { class: "card sprint-history" },
      el("h2", {}, sprint.name),
      el(
        "p",
        {},
        `progression ${stats.progression.toFixed(0)}% · open issues ${stats.open_issue_count} · solved ` +
          Object.entries(stats.solved_by_type)
            .map(([kind, count]) => `${kind}: ${count}`)
            .join(", "),
      ),
    );
    const charts = el("div", { class: "chart-grid" });
    section.appendChild(charts);
    renderChart(charts, await api.sprintBurndown(sprint.id));
    renderChart(charts, await api.sprintCumulative(sprint.id));
    root.appendChild(section);
  }
}

function taskTable(tasks: Task[]): HTMLElement {
  const table = el(
    "table",
    { class: "data-table" },
    el(
      "tr",
      {},
      ...["ID", "Name", "Type", "Priority", "Assignees", "Planned", "Status"].map((h) =>
        el("th", {}, h),
      ),
    ),
  );
  for (const task of tasks) {
    table.appendChild(
      el(
        "tr",
        {},
        el("td", {}, task.task_id),
        el("td", {}, task.name),
        el("td", {}, task.item_type),
        el("td", {}, task.priority),
        el("td", {}, task.assignees.join(", ")),
        el("td", {}, String(task.planned_effort)),
        el("td", {}, task.status),
      ),
    );
  }
  return table;
}

// -- kanban board --------------------------------------------------------------------

const LANES: Lane[] = ["ToDo", "InProgress", "Done"];

export async function boardPage(root: HTMLElement, api: ApiClient, wsId: string): Promise<void> {
  clear(root);
  root.appendChild(el("h1", {}, "Kanban board"));
  const controller = new BoardController(
    {
      fetchWorkspace: (id) => api.getWorkspace(id),
      fetchTasks: (id) => api.listTasks(id),
      moveTask: (gid, status, version) => api.moveTask(gid, status, version),
    },
    wsId,
  );
  const boardEl = el("div", { class: "board", id: "board" });
  root.appendChild(boardEl);
  controller.onError = (message) => toast(message);
  controller.onChange = () => renderBoard(boardEl, controller);
  await controller.load();
}

export function renderBoard(boardEl: HTMLElement, controller: BoardController): void {
  boardEl.replaceChildren();
  boardEl.dataset.version = String(controller.version);
  const lanes = controller.lanes();
  for (const lane of LANES) {
    const laneEl = el("section", { class: "lane", "data-lane": lane }, el("h2", {}, lane));
    laneEl.addEventListener("dragover", (event) => event.preventDefault());
    laneEl.addEventListener("drop", (event) => {
      event.preventDefault();
      const gid = event.dataTransfer?.getData("text/task");
      if (gid) void controller.move(gid, lane);
    });
    for (const task of lanes[lane]) {
      const card = el(
        "article",
        { class: "task-card", draggable: "true", "data-gid": task.id },
        el("strong", {}, `${task.task_id} ${task.name}`),
        el("span", {}, `${task.item_type} · ${task.priority}`),
      );
      card.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/task", task.id);
      });
      laneEl.appendChild(card);
    }
    boardEl.appendChild(laneEl);
  }
}

// -- settings ------------------------------------------------------------------------

export async function workspaceSettingsPage(
  root: HTMLElement,
  api: ApiClient,
  wsId: string,
): Promise<void> {
  clear(root);
  const ws = await api.getWorkspace(wsId);
  root.appendChild(el("h1", {}, `Settings: ${ws.name}`));
  const name = el("input", { value: ws.name });
  const status = el("select", {});
  for (const option of ["Active", "Canceled", "Completed"]) {
    const node = el("option", { value: option }, option);
    if (option === ws.status) node.setAttribute("selected", "selected");
    status.appendChild(node);
  }
  const benefits = el("textarea", {}, ws.benefits);
  const criteria = el("textarea", {}, ws.success_criteria);
  const form = el(
    "form",
    { class: "card settings-form" },
    label("Name", name),
    label("Status", status),
    label("Benefits", benefits),
    label("Success criteria", criteria),
    el("button", {}, "Save"),
  );
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await api.updateWorkspace(wsId, {
        name: name.value,
        status: status.value as Workspace["status"],
        benefits: benefits.value,
        success_criteria: criteria.value,
      });
      toast("saved");
    } catch (error) {
      errorBanner(root, error);
    }
  });
  root.appendChild(form);
}

export async function orgSettingsPage(
  root: HTMLElement,
  api: ApiClient,
  orgId: string,
): Promise<void> {
  clear(root);
  root.appendChild(el("h1", {}, "Organization settings"));
  const orgs = await api.listOrgs();
  const org = orgs.find((o) => o.id === orgId);
  if (!org) return;
  const name = el("input", { value: org.name });
  const activity = el("input", { value: org.activity_type });
  const country = el("input", { value: org.country });
  const form = el(
    "form",
    { class: "card settings-form" },
    label("Name", name),
    label("Activity", activity),
    label("Country", country),
    el("button", {}, "Save"),
  );
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await api.updateOrg(orgId, {
        name: name.value,
        activity_type: activity.value,
        country: country.value,
      });
      toast("saved");
    } catch (error) {
      errorBanner(root, error);
    }
  });
  root.appendChild(form);
}

function label(text: string, control: HTMLElement): HTMLElement {
  return el("label", {}, el("span", {}, text), control);
}
