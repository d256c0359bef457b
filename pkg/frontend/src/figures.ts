/** Figure layouts on top of the bundle data.  Rendering only ever reads the
 * documented bundle formats; no physics is recomputed here. */

import { Bundle, CaseData } from "./bundle.js";
import { column, hasColumn, Table } from "./csv.js";
import {
  axisBox,
  bandPath,
  colormap,
  document as svgDocument,
  fmt,
  linearScale,
  Panel,
  polyline,
} from "./svg.js";

export type FigureId = "fig2" | "fig3" | "fig4" | "fig5";

const CASE_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

const PANEL_W = 300;
const PANEL_H = 210;
const MARGIN = { left: 64, right: 16, top: 30, bottom: 44 };

function newPanel(col: number, row: number): Panel {
  return {
    body: [],
    x: col * (PANEL_W + 8) + MARGIN.left,
    y: row * (PANEL_H + 18) + MARGIN.top,
    w: PANEL_W,
    h: PANEL_H,
  };
}

function panelScales(p: Panel, xDom: [number, number], yDom: [number, number]) {
  const sx = linearScale(xDom, [p.x, p.x + p.w]);
  const sy = linearScale(yDom, [p.y + p.h, p.y]);
  return { sx, sy };
}

function extent(vals: number[], pad = 0.05): [number, number] {
  let lo = Math.min(...vals);
  let hi = Math.max(...vals);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const span = hi - lo;
  return [Math.min(lo, 0), hi + pad * span];
}

interface SeriesSpec {
  method: string;
  column: string;
  fallback?: string;
}

/** Coupling-ranked line width: thicker lines are stronger couplings. */
function widthFor(c: CaseData, cases: CaseData[]): number {
  const all = [...new Set(cases.map((k) => k.info.omega_c))].sort((a, b) => a - b);
  return 1 + all.indexOf(c.info.omega_c) * 0.8;
}

function methodStyle(method: string): { dash: string; marker: "none" | "circle" | "square" } {
  switch (method) {
    case "master":
      return { dash: "", marker: "none" };
    case "semiclassical":
      return { dash: "6,3", marker: "none" };
    case "bo":
      return { dash: "", marker: "circle" };
    case "twa":
      return { dash: "", marker: "square" };
    default:
      return { dash: "2,2", marker: "none" };
  }
}

function seriesFor(table: Table, spec: SeriesSpec): number[] | null {
  if (hasColumn(table, spec.column)) return column(table, spec.column);
  if (spec.fallback && hasColumn(table, spec.fallback)) return column(table, spec.fallback);
  return null;
}

function drawSeries(
  p: Panel,
  t: number[],
  y: number[],
  color: string,
  width: number,
  method: string,
  sx: ReturnType<typeof linearScale>,
  sy: ReturnType<typeof linearScale>,
): void {
  const style = methodStyle(method);
  if (style.marker === "none") {
    const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
    p.body.push(
      `<polyline points="${polyline(t, y, sx, sy)}" fill="none" stroke="${color}" stroke-width="${fmt(width)}"${dash}/>`,
    );
    return;
  }
  const step = Math.max(1, Math.floor(t.length / 24));
  for (let i = 0; i < t.length; i += step) {
    const cx = sx(t[i]);
    const cy = sy(y[i]);
    if (style.marker === "circle") {
      p.body.push(
        `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="2.6" fill="none" stroke="${color}" stroke-width="1"/>`,
      );
    } else {
      p.body.push(
        `<rect x="${fmt(cx - 2.4)}" y="${fmt(cy - 2.4)}" width="4.8" height="4.8" fill="${color}" fill-opacity="0.75"/>`,
      );
    }
  }
}

/** Rows of time-series panels, one column per case, one row per observable. */
function renderTimeSeriesGrid(bundle: Bundle, rows: { label: string; spec: SeriesSpec[] }[]): string {
  const cases = bundle.cases;
  const body: string[] = [];
  rows.forEach((rowSpec, r) => {
    cases.forEach((c, i) => {
      const p = newPanel(i, r);
      const master = c.tables.get("master");
      const anyTable = master ?? [...c.tables.values()][0];
      const t = column(anyTable, "time");
      const series: { y: number[]; method: string }[] = [];
      for (const spec of rowSpec.spec) {
        const table = c.tables.get(spec.method);
        if (!table) continue;
        const y = seriesFor(table, spec);
        if (y) series.push({ y, method: spec.method });
      }
      if (series.length === 0) {
        throw new Error(`no data for row ${rowSpec.label} in case ${c.info.label}`);
      }
      const yDom = extent(series.flatMap((s) => s.y));
      const { sx, sy } = panelScales(p, [t[0], t[t.length - 1]], yDom);
      for (const s of series) {
        drawSeries(p, t, s.y, CASE_COLORS[i % CASE_COLORS.length], widthFor(c, cases), s.method, sx, sy);
      }
      axisBox(p, sx, sy, "t [1/gamma_a]", rowSpec.label, r === 0 ? c.info.label : "");
      body.push(...p.body);
    });
  });
  const width = cases.length * (PANEL_W + 8) + MARGIN.left + MARGIN.right;
  const height = rows.length * (PANEL_H + 18) + MARGIN.top + MARGIN.bottom;
  return svgDocument(width, height, body);
}

function renderFig2(bundle: Bundle): string {
  return renderTimeSeriesGrid(bundle, [
    {
      label: "|<b>|",
      spec: [
        { method: "master", column: "abs_b" },
        { method: "semiclassical", column: "abs_b" },
        { method: "bo", column: "abs_b" },
        { method: "twa", column: "abs_b" },
      ],
    },
    {
      label: "n_a",
      spec: [
        { method: "master", column: "n_a" },
        { method: "semiclassical", column: "n_a" },
        { method: "bo", column: "n_a_ss" },
        { method: "twa", column: "n_a" },
      ],
    },
    {
      label: "n_b",
      spec: [
        { method: "master", column: "n_b" },
        { method: "semiclassical", column: "abs_b_sq" },
        { method: "bo", column: "abs_b_sq" },
        { method: "twa", column: "n_b" },
      ],
    },
  ]);
}

/** Mean amplitude with the quantum uncertainty band, one panel per detuning
 * group, both matched-rate cases per panel. */
function renderFig3(bundle: Bundle): string {
  const groups = new Map<number, CaseData[]>();
  for (const c of bundle.cases) {
    const list = groups.get(c.info.delta) ?? [];
    list.push(c);
    groups.set(c.info.delta, list);
  }
  const body: string[] = [];
  let col = 0;
  for (const [delta, cases] of [...groups.entries()].sort((a, b) => a[0] - b[0])) {
    const p = newPanel(col, 0);
    let tMax = 0;
    let yMax = 0;
    for (const c of cases) {
      const m = c.tables.get("master");
      if (!m) throw new Error(`case ${c.info.label} lacks the master table`);
      const t = column(m, "time");
      const absB = column(m, "abs_b");
      const varB = column(m, "var_b");
      tMax = Math.max(tMax, t[t.length - 1]);
      yMax = Math.max(yMax, ...absB.map((v, i) => v + Math.sqrt(Math.max(0, varB[i]))));
    }
    const { sx, sy } = panelScales(p, [0, tMax], [0, yMax * 1.05]);
    cases.forEach((c, i) => {
      const m = c.tables.get("master")!;
      const t = column(m, "time");
      const absB = column(m, "abs_b");
      const sd = column(m, "var_b").map((v) => Math.sqrt(Math.max(0, v)));
      const lo = absB.map((v, k) => Math.max(0, v - sd[k]));
      const hi = absB.map((v, k) => v + sd[k]);
      const color = CASE_COLORS[i % CASE_COLORS.length];
      p.body.push(`<path d="${bandPath(t, lo, hi, sx, sy)}" fill="${color}" fill-opacity="0.25" stroke="none"/>`);
      p.body.push(
        `<polyline points="${polyline(t, absB, sx, sy)}" fill="none" stroke="${color}" stroke-width="1.6"${i % 2 ? ' stroke-dasharray="6,3"' : ""}/>`,
      );
    });
    axisBox(p, sx, sy, "t [1/gamma_a]", "|<b>| and spread", `delta = ${fmt(delta)}`);
    body.push(...p.body);
    col += 1;
  }
  const width = col * (PANEL_W + 8) + MARGIN.left + MARGIN.right;
  return svgDocument(width, PANEL_H + MARGIN.top + MARGIN.bottom + 18, body);
}

/** Heatmap rows: one row per case, one column per snapshot. */
function renderFig4(bundle: Bundle): string {
  const cell = 170;
  const gap = 10;
  const body: string[] = [];
  const rows = bundle.cases.length;
  let cols = 0;
  bundle.cases.forEach((c, r) => {
    if (c.qGrids.length === 0) {
      throw new Error(`case ${c.info.label} carries no quasi-probability grids`);
    }
    cols = Math.max(cols, c.qGrids.length);
    c.qGrids.forEach((g, k) => {
      const x0 = MARGIN.left + k * (cell + gap);
      const y0 = MARGIN.top + r * (cell + gap + 22);
      const qMax = Math.max(...g.values.map((row) => Math.max(...row)));
      const px = cell / g.nPoints;
      for (let i = 0; i < g.nPoints; i++) {
        for (let j = 0; j < g.nPoints; j++) {
          const v = g.values[i][j] / (qMax || 1);
          // row i runs along Im(beta); draw the imaginary axis upward
          const x = x0 + j * px;
          const y = y0 + (g.nPoints - 1 - i) * px;
          body.push(
            `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(px + 0.05)}" height="${fmt(px + 0.05)}" fill="${colormap(v)}"/>`,
          );
        }
      }
      body.push(
        `<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${cell}" height="${cell}" fill="none" stroke="#333"/>`,
      );
      body.push(
        `<text x="${fmt(x0 + cell / 2)}" y="${fmt(y0 + cell + 14)}" font-size="10" text-anchor="middle">t = ${fmt(g.time)}, ring ${fmt(g.ringStatistic)}</text>`,
      );
      if (k === 0) {
        body.push(
          `<text x="${fmt(x0 - 8)}" y="${fmt(y0 + cell / 2)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${fmt(x0 - 8)} ${fmt(y0 + cell / 2)})">${c.info.label}</text>`,
        );
      }
    });
  });
  const width = MARGIN.left + cols * (cell + gap) + MARGIN.right;
  const height = MARGIN.top + rows * (cell + gap + 22) + 10;
  return svgDocument(width, height, body);
}

/** Amplitude variance: exact curves with ensemble markers, one panel per
 * detuning group, one color per coupling. */
function renderFig5(bundle: Bundle): string {
  const groups = new Map<number, CaseData[]>();
  for (const c of bundle.cases) {
    const list = groups.get(c.info.delta) ?? [];
    list.push(c);
    groups.set(c.info.delta, list);
  }
  const body: string[] = [];
  let col = 0;
  for (const [delta, cases] of [...groups.entries()].sort((a, b) => a[0] - b[0])) {
    const p = newPanel(col, 0);
    let tMax = 0;
    let yMax = 0;
    for (const c of cases) {
      const m = c.tables.get("master");
      if (!m) throw new Error(`case ${c.info.label} lacks the master table`);
      tMax = Math.max(tMax, c.info.t_final);
      yMax = Math.max(yMax, ...column(m, "var_b"));
      const w = c.tables.get("twa");
      if (w) yMax = Math.max(yMax, ...column(w, "var_b"));
    }
    const { sx, sy } = panelScales(p, [0, tMax], [0, yMax * 1.05]);
    cases
      .sort((a, b) => a.info.omega_c - b.info.omega_c)
      .forEach((c, i) => {
        const color = CASE_COLORS[i % CASE_COLORS.length];
        const m = c.tables.get("master")!;
        drawSeries(p, column(m, "time"), column(m, "var_b"), color, 1.4, "master", sx, sy);
        const w = c.tables.get("twa");
        if (w) {
          drawSeries(p, column(w, "time"), column(w, "var_b"), color, 1, "twa", sx, sy);
        }
      });
    axisBox(p, sx, sy, "t [1/gamma_a]", "amplitude variance", `delta = ${fmt(delta)}`);
    body.push(...p.body);
    col += 1;
  }
  const width = col * (PANEL_W + 8) + MARGIN.left + MARGIN.right;
  return svgDocument(width, PANEL_H + MARGIN.top + MARGIN.bottom + 18, body);
}

export function renderFigure(figure: FigureId, bundle: Bundle): string {
  if (bundle.cases.length === 0) {
    throw new Error("bundle has no cases");
  }
  switch (figure) {
    case "fig2":
      return renderFig2(bundle);
    case "fig3":
      return renderFig3(bundle);
    case "fig4":
      return renderFig4(bundle);
    case "fig5":
      return renderFig5(bundle);
  }
}

export function figureForScenario(name: string): FigureId | null {
  for (const id of ["fig2", "fig3", "fig4", "fig5"] as FigureId[]) {
    if (name.startsWith(id)) return id;
  }
  return null;
}
