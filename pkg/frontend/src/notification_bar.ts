/** The header notification bar: live badge plus an actionable dropdown. */

import { NotificationCenter } from "./notifications";
import type { AppNotification } from "./types";
import { el } from "./views";

export function renderNotificationBar(
  container: HTMLElement,
  center: NotificationCenter,
): HTMLElement {
  const badge = el("span", { class: "badge", id: "notif-badge" }, "0");
  const list = el("ul", { class: "notif-list", id: "notif-list", hidden: "hidden" });
  const toggle = el("button", { class: "notif-toggle", "aria-label": "notifications" }, "🔔", badge);
  toggle.addEventListener("click", () => {
    if (list.hasAttribute("hidden")) list.removeAttribute("hidden");
    else list.setAttribute("hidden", "hidden");
  });
  const bar = el("div", { class: "notif-bar" }, toggle, list);
  container.appendChild(bar);

  center.onChange = () => {
    badge.textContent = String(center.unreadCount);
    list.replaceChildren();
    for (const notification of center.items.slice(0, 20)) {
      list.appendChild(renderRow(center, notification));
    }
    if (center.items.length === 0) list.appendChild(el("li", { class: "empty" }, "no notifications"));
  };
  center.onChange();
  return bar;
}

function renderRow(center: NotificationCenter, notification: AppNotification): HTMLElement {
  const row = el(
    "li",
    {
      class: `notif-row${notification.read ? " read" : ""}`,
      "data-id": notification.id,
      "data-kind": notification.kind,
    },
    el("span", { class: "notif-text" }, describe(notification)),
  );
  if (notification.actionable && !notification.read) {
    const accept = el("button", { class: "accept" }, "Accept");
    const reject = el("button", { class: "reject" }, "Reject");
    accept.addEventListener("click", () => void center.act(notification.id, "Accept"));
    reject.addEventListener("click", () => void center.act(notification.id, "Reject"));
    row.append(accept, reject);
  }
  return row;
}

function describe(notification: AppNotification): string {
  const payload = notification.payload as Record<string, string>;
  switch (notification.kind) {
    case "InviteCreated":
      return `Invitation to join ${payload["scope_kind"]} ${payload["scope_id"]} as ${payload["offered_role"]}`;
    case "InviteAccepted":
      return `${payload["invitee_email"]} accepted your invitation`;
    case "InviteRejected":
      return `${payload["invitee_email"]} declined your invitation`;
    case "DeadlineApproaching":
      return `${payload["ws_name"]} ends ${payload["planned_end"]} (${payload["days_left"]} days left)`;
    case "ImportCompleted":
      return `Workspace ${payload["ws_id"]} imported new data`;
    default:
      return notification.kind;
  }
}
