import { describe, expect, it } from "vitest";

import { renderChart } from "../src/charts";
import type { ChartSeries } from "../src/types";
import { renderSeriesList, renderWorkspaceBundle } from "../src/views";
import orgAnalytics from "./fixtures/org_analytics.json";
import sprintBurndown from "./fixtures/sprint_burndown.json";
import workspaceAnalytics from "./fixtures/workspace_analytics.json";

function host(): HTMLElement {
  const element = document.createElement("div");
  document.body.appendChild(element);
  return element;
}

describe("chart rendering", () => {
  it("org analytics page: exactly five charts, kinds Line, Bar, Pie, Bar, Bar", () => {
    const grid = host();
    renderSeriesList(grid, orgAnalytics.series as ChartSeries[]);
    const charts = grid.querySelectorAll(".chart");
    expect(charts).toHaveLength(5);
    expect([...charts].map((chart) => chart.getAttribute("data-kind"))).toEqual([
      "Line",
      "Bar",
      "Pie",
      "Bar",
      "Bar",
    ]);
    // Kind fidelity: the rendered kind equals the payload kind, position by position.
    (orgAnalytics.series as ChartSeries[]).forEach((series, i) => {
      expect(charts[i]!.getAttribute("data-kind")).toBe(series.kind);
    });
  });

  it("workspace analytics page renders the five-series bundle", () => {
    const grid = host();
    renderWorkspaceBundle(grid, workspaceAnalytics as Record<string, ChartSeries>);
    const charts = grid.querySelectorAll(".chart");
    expect(charts).toHaveLength(5);
    const kinds = [...charts].map((chart) => chart.getAttribute("data-kind"));
    expect(kinds).toEqual(["Bar", "Pie", "Pie", "Bar", "Bar"]);
  });

  it("pie charts carry one labeled slice per category", () => {
    const grid = host();
    const pie = (orgAnalytics.series as ChartSeries[])[2]!;
    const figure = renderChart(grid, pie);
    expect(figure.dataset.kind).toBe("Pie");
    const slices = figure.querySelectorAll("path.slice");
    expect(slices).toHaveLength(pie.categories.length);
  });

  it("every value gets a legible on-chart label", () => {
    const figure = renderChart(host(), sprintBurndown as ChartSeries);
    const labels = [...figure.querySelectorAll("text.value-label")].map(
      (node) => node.textContent,
    );
    const burndown = sprintBurndown as ChartSeries;
    for (const value of burndown.datasets[0]!.values) {
      expect(labels).toContain(Number.isInteger(value) ? String(value) : value.toFixed(1));
    }
  });

  it("axis labels come from the categories", () => {
    const bar = (orgAnalytics.series as ChartSeries[])[1]!;
    const figure = renderChart(host(), bar);
    const labels = [...figure.querySelectorAll("text.axis-label")].map((n) => n.textContent);
    expect(labels).toEqual(bar.categories);
  });

  it("empty series render a no-data placeholder", () => {
    const figure = renderChart(host(), {
      title: "empty",
      kind: "Bar",
      unit: "x",
      categories: [],
      datasets: [{ name: "d", values: [] }],
    });
    expect(figure.querySelector(".chart-empty")!.textContent).toBe("no data");
    expect(figure.querySelector("svg")).toBeNull();
  });

  it("malformed payloads render an error placeholder instead of throwing", () => {
    const cases: unknown[] = [
      null,
      { title: "x", kind: "Scatter", unit: "", categories: [], datasets: [] },
      { title: "x", kind: "Bar", unit: "", categories: ["a"], datasets: [{ name: "d", values: [1, 2] }] },
      { title: "x", kind: "Pie", unit: "", categories: ["a"], datasets: [{ name: "d", values: [1] }, { name: "e", values: [2] }] },
      { title: "x", kind: "Line", unit: "", categories: ["a"], datasets: [{ name: "d", values: [Number.NaN] }] },
    ];
    for (const payload of cases) {
      const figure = renderChart(host(), payload);
      expect(figure.classList.contains("chart-error")).toBe(true);
    }
  });

  it("multi-dataset charts include a legend naming each dataset", () => {
    const costs = (orgAnalytics.series as ChartSeries[])[4]!;
    const figure = renderChart(host(), costs);
    const entries = [...figure.querySelectorAll(".chart-legend li")].map((n) =>
      n.textContent!.trim(),
    );
    expect(entries).toEqual(["Planned", "Current"]);
  });
});
