/** Dependency-free SVG charts for the dashboard series payloads.
 *
 * The rendered element carries data-kind matching the payload kind 1:1.
 * Every value gets a visible numeric label (small dashboards earned the
 * feedback that numbers must be readable). Malformed payloads render an
 * error placeholder instead of throwing; empty series render "no data".
 */

import type { ChartSeries } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 520;
const HEIGHT = 300;
const MARGIN = { top: 24, right: 16, bottom: 56, left: 46 };
const PALETTE = ["#3566b0", "#d97f2c", "#4f9b55", "#b0485e", "#7b5cb0", "#5a8a96"];

function isValidSeries(series: unknown): series is ChartSeries {
  if (typeof series !== "object" || series === null) return false;
  const s = series as ChartSeries;
  if (!["Bar", "Line", "Pie"].includes(s.kind)) return false;
  if (!Array.isArray(s.categories) || !Array.isArray(s.datasets)) return false;
  if (s.kind === "Pie" && s.datasets.length !== 1) return false;
  for (const dataset of s.datasets) {
    if (!Array.isArray(dataset.values)) return false;
    if (dataset.values.length !== s.categories.length) return false;
    if (!dataset.values.every((v) => typeof v === "number" && Number.isFinite(v))) return false;
  }
  return true;
}

export function renderChart(container: HTMLElement, series: unknown): HTMLElement {
  const figure = document.createElement("figure");
  figure.className = "chart";
  container.appendChild(figure);

  if (!isValidSeries(series)) {
    figure.classList.add("chart-error");
    figure.dataset.kind = "error";
    figure.textContent = "Chart unavailable (malformed data)";
    return figure;
  }
  figure.dataset.kind = series.kind;

  const caption = document.createElement("figcaption");
  caption.textContent = series.unit ? `${series.title} (${series.unit})` : series.title;
  figure.appendChild(caption);

  if (series.categories.length === 0) {
    const empty = document.createElement("p");
    empty.className = "chart-empty";
    empty.textContent = "no data";
    figure.appendChild(empty);
    return figure;
  }

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("role", "img");
  figure.appendChild(svg);

  if (series.kind === "Pie") drawPie(svg, series);
  else if (series.kind === "Bar") drawBars(svg, series);
  else drawLines(svg, series);

  if (series.datasets.length > 1) figure.appendChild(legend(series));
  return figure;
}

function legend(series: ChartSeries): HTMLElement {
  const list = document.createElement("ul");
  list.className = "chart-legend";
  series.datasets.forEach((dataset, i) => {
    const item = document.createElement("li");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = PALETTE[i % PALETTE.length] ?? "#333";
    item.appendChild(swatch);
    item.appendChild(document.createTextNode(dataset.name));
    list.appendChild(item);
  });
  return list;
}

function svgText(svg: SVGElement, x: number, y: number, text: string, cls: string): void {
  const node = document.createElementNS(SVG_NS, "text");
  node.setAttribute("x", String(x));
  node.setAttribute("y", String(y));
  node.setAttribute("class", cls);
  node.textContent = text;
  svg.appendChild(node);
}

function formatValue(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(1);
}

function plotArea() {
  return {
    x: MARGIN.left,
    y: MARGIN.top,
    w: WIDTH - MARGIN.left - MARGIN.right,
    h: HEIGHT - MARGIN.top - MARGIN.bottom,
  };
}

function maxValue(series: ChartSeries): number {
  let max = 0;
  for (const dataset of series.datasets) for (const v of dataset.values) max = Math.max(max, v);
  return max || 1;
}

function drawCategoryLabels(svg: SVGElement, series: ChartSeries): void {
  const area = plotArea();
  const step = area.w / series.categories.length;
  series.categories.forEach((label, i) => {
    svgText(svg, area.x + step * (i + 0.5), HEIGHT - MARGIN.bottom + 18, label, "axis-label");
  });
}

function drawBars(svg: SVGElement, series: ChartSeries): void {
  const area = plotArea();
  const max = maxValue(series);
  const groups = series.categories.length;
  const perGroup = series.datasets.length;
  const groupWidth = area.w / groups;
  const barWidth = (groupWidth * 0.7) / perGroup;
  series.datasets.forEach((dataset, d) => {
    dataset.values.forEach((value, i) => {
      const height = (value / max) * area.h;
      const x = area.x + groupWidth * i + groupWidth * 0.15 + barWidth * d;
      const y = area.y + area.h - height;
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(x));
      rect.setAttribute("y", String(y));
      rect.setAttribute("width", String(Math.max(barWidth - 2, 1)));
      rect.setAttribute("height", String(height));
      rect.setAttribute("fill", PALETTE[d % PALETTE.length] ?? "#333");
      rect.setAttribute("class", "bar");
      svg.appendChild(rect);
      svgText(svg, x + barWidth / 2 - 1, y - 4, formatValue(value), "value-label");
    });
  });
  drawCategoryLabels(svg, series);
}

function drawLines(svg: SVGElement, series: ChartSeries): void {
  const area = plotArea();
  const max = maxValue(series);
  const n = series.categories.length;
  const step = n > 1 ? area.w / (n - 1) : 0;
  series.datasets.forEach((dataset, d) => {
    const points = dataset.values.map((value, i) => {
      const x = n > 1 ? area.x + step * i : area.x + area.w / 2;
      const y = area.y + area.h - (value / max) * area.h;
      return { x, y, value };
    });
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", points.map((p) => `${p.x},${p.y}`).join(" "));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", PALETTE[d % PALETTE.length] ?? "#333");
    line.setAttribute("stroke-width", "2");
    line.setAttribute("class", "line");
    svg.appendChild(line);
    points.forEach((p) => {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(p.x));
      dot.setAttribute("cy", String(p.y));
      dot.setAttribute("r", "3");
      dot.setAttribute("fill", PALETTE[d % PALETTE.length] ?? "#333");
      svg.appendChild(dot);
      svgText(svg, p.x, p.y - 8, formatValue(p.value), "value-label");
    });
  });
  const sparse = Math.ceil(series.categories.length / 8);
  series.categories.forEach((label, i) => {
    if (i % sparse !== 0 && i !== series.categories.length - 1) return;
    const x = n > 1 ? area.x + step * i : area.x + area.w / 2;
    svgText(svg, x, HEIGHT - MARGIN.bottom + 18, label, "axis-label");
  });
}

function drawPie(svg: SVGElement, series: ChartSeries): void {
  const dataset = series.datasets[0];
  if (!dataset) return;
  const total = dataset.values.reduce((a, b) => a + b, 0);
  const cx = WIDTH / 2;
  const cy = (HEIGHT - 20) / 2 + 10;
  const radius = Math.min(WIDTH, HEIGHT) / 2 - 48;
  if (total === 0) {
    svgText(svg, cx, cy, "all zero", "axis-label");
    return;
  }
  let angle = -Math.PI / 2;
  dataset.values.forEach((value, i) => {
    const share = value / total;
    const end = angle + share * Math.PI * 2;
    const large = share > 0.5 ? 1 : 0;
    const x1 = cx + radius * Math.cos(angle);
    const y1 = cy + radius * Math.sin(angle);
    const x2 = cx + radius * Math.cos(end);
    const y2 = cy + radius * Math.sin(end);
    const path = document.createElementNS(SVG_NS, "path");
    const d =
      share >= 1
        ? `M ${cx - radius} ${cy} A ${radius} ${radius} 0 1 1 ${cx + radius} ${cy} ` +
          `A ${radius} ${radius} 0 1 1 ${cx - radius} ${cy}`
        : `M ${cx} ${cy} L ${x1} ${y1} A ${radius} ${radius} 0 ${large} 1 ${x2} ${y2} Z`;
    path.setAttribute("d", d);
    path.setAttribute("fill", PALETTE[i % PALETTE.length] ?? "#333");
    path.setAttribute("class", "slice");
    svg.appendChild(path);
    if (value > 0) {
      const mid = (angle + end) / 2;
      const lx = cx + radius * 0.65 * Math.cos(mid);
      const ly = cy + radius * 0.65 * Math.sin(mid);
      svgText(svg, lx, ly, `${series.categories[i]}: ${formatValue(value)}`, "value-label");
    }
    angle = end;
  });
}
