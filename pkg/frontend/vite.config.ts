import { defineConfig } from "vite";

const BACKEND = "http://127.0.0.1:8400";
const API_PREFIXES = [
  "/auth",
  "/orgs",
  "/workspaces",
  "/sprints",
  "/tasks",
  "/files",
  "/templates",
  "/notifications",
  "/invites",
  "/admin",
  "/health",
];

export default defineConfig({
  server: {
    proxy: Object.fromEntries(API_PREFIXES.map((prefix) => [prefix, BACKEND])),
  },
});
