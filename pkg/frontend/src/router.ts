/** Hash router: "#/orgs/org-1/analytics" -> handler with params. */

export type RouteHandler = (params: Record<string, string>) => void | Promise<void>;

interface Route {
  pattern: RegExp;
  names: string[];
  handler: RouteHandler;
}

export class Router {
  private routes: Route[] = [];
  fallback: RouteHandler = () => {};

  on(path: string, handler: RouteHandler): this {
    const names: string[] = [];
    const pattern = new RegExp(
      "^" +
        path
          .split("/")
          .map((part) => {
            if (part.startsWith(":")) {
              names.push(part.slice(1));
              return "([^/]+)";
            }
            return part.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
          })
          .join("/") +
        "$",
    );
    this.routes.push({ pattern, names, handler });
    return this;
  }

  dispatch(hash: string): void {
    const path = hash.replace(/^#/, "") || "/";
    for (const route of this.routes) {
      const match = path.match(route.pattern);
      if (match) {
        const params: Record<string, string> = {};
        route.names.forEach((name, i) => {
          params[name] = decodeURIComponent(match[i + 1] ?? "");
        });
        void route.handler(params);
        return;
      }
    }
    void this.fallback({});
  }

  start(): void {
    window.addEventListener("hashchange", () => this.dispatch(location.hash));
    this.dispatch(location.hash);
  }
}

export function navigate(path: string): void {
  location.hash = path;
}
