import { ApiClient } from "./api";
import { httpLineSource, NotificationCenter } from "./notifications";
import { renderNotificationBar } from "./notification_bar";
import { navigate, Router } from "./router";
import {
  backlogPage,
  boardPage,
  clear,
  el,
  loginPage,
  orgAnalyticsPage,
  orgListPage,
  orgMainPage,
  orgSettingsPage,
  sprintBacklogPage,
  sprintCreatePage,
  sprintHistoryPage,
  workspaceAnalyticsPage,
  workspacePage,
  workspaceSettingsPage,
} from "./views";

const api = new ApiClient("");
const root = document.getElementById("app") as HTMLElement;
const header = document.getElementById("header") as HTMLElement;

let center: NotificationCenter | null = null;

function onAuthed(): void {
  header.replaceChildren(
    el("a", { href: "#/", class: "brand" }, "workdesk"),
  );
  center = new NotificationCenter(
    {
      fetchAll: () => api.listNotifications(),
      act: (id, decision) => api.actOnNotification(id, decision),
    },
    api.token ? httpLineSource("", api.token) : null,
  );
  renderNotificationBar(header, center);
  void center.refresh();
  void center.run();
  navigate("/");
}

const router = new Router();
router
  .on("/", () => (api.token ? orgListPage(root, api) : loginPage(root, api, onAuthed)))
  .on("/orgs/:orgId", ({ orgId }) => orgMainPage(root, api, orgId!))
  .on("/orgs/:orgId/analytics", ({ orgId }) => orgAnalyticsPage(root, api, orgId!))
  .on("/orgs/:orgId/settings", ({ orgId }) => orgSettingsPage(root, api, orgId!))
  .on("/workspaces/:wsId", ({ wsId }) => workspacePage(root, api, wsId!))
  .on("/workspaces/:wsId/analytics", ({ wsId }) => workspaceAnalyticsPage(root, api, wsId!))
  .on("/workspaces/:wsId/backlog", ({ wsId }) => backlogPage(root, api, wsId!))
  .on("/workspaces/:wsId/sprint", ({ wsId }) => sprintBacklogPage(root, api, wsId!))
  .on("/workspaces/:wsId/sprints/new", ({ wsId }) => sprintCreatePage(root, api, wsId!))
  .on("/workspaces/:wsId/history", ({ wsId }) => sprintHistoryPage(root, api, wsId!))
  .on("/workspaces/:wsId/board", ({ wsId }) => boardPage(root, api, wsId!))
  .on("/workspaces/:wsId/settings", ({ wsId }) => workspaceSettingsPage(root, api, wsId!));
router.fallback = () => {
  clear(root).appendChild(el("p", {}, "Page not found."));
};

router.start();
