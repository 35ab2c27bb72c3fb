/**
 * Figure assembly from the CSV outputs: a standardized-density panel with
 * an optional normal overlay, multi-panel density evolution, and
 * growth-exponent convergence.  The plotter reads statistics from the
 * files; it never recomputes them.
 */

import { readDensityPanels, readGrowthSeries, readStandardizedDensity, SchemaError } from "./csv.js";
import { document, linearScale, logScale, Panel, Scale } from "./svg.js";

export interface FigureSpec {
  kind: "standardized-density" | "density-panels" | "growth-exponents";
  inputs: string[];
  output: string;
  overlayNormal?: boolean;
  semilogy?: boolean;
  panelLabels?: string[];
  width?: number;
  height?: number;
}

const KINDS = new Set(["standardized-density", "density-panels", "growth-exponents"]);

export function validateSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null) throw new SchemaError("figure spec must be an object");
  const spec = raw as Record<string, unknown>;
  if (typeof spec.kind !== "string" || !KINDS.has(spec.kind)) {
    throw new SchemaError(`figure spec kind must be one of ${[...KINDS].join(", ")}`);
  }
  if (!Array.isArray(spec.inputs) || spec.inputs.length === 0 || spec.inputs.some((p) => typeof p !== "string")) {
    throw new SchemaError("figure spec needs a non-empty list of input paths");
  }
  if (typeof spec.output !== "string" || spec.output.length === 0) {
    throw new SchemaError("figure spec needs an output path");
  }
  for (const key of ["overlayNormal", "semilogy"]) {
    if (key in spec && typeof spec[key] !== "boolean") throw new SchemaError(`${key} must be boolean`);
  }
  return spec as unknown as FigureSpec;
}

const COLORS = ["#1f5fa8", "#c23b22", "#2e8b57", "#8a2be2", "#b8860b", "#708090"];

function positiveRange(values: number[][], floor = 1e-12): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of values) {
    for (const v of series) {
      if (Number.isFinite(v) && v > floor) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
  }
  if (!(lo < hi)) throw new SchemaError("no positive values to place on a log axis");
  return [lo, hi];
}

function range(values: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const series of values) {
    for (const v of series) {
      if (Number.isFinite(v)) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
  }
  if (!(lo <= hi)) throw new SchemaError("no finite values to plot");
  if (lo === hi) [lo, hi] = [lo - 1, hi + 1];
  return [lo, hi];
}

function renderStandardized(spec: FigureSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 420;
  const data = readStandardizedDensity(spec.inputs[0]);
  const rect = { x: 70, y: 30, width: width - 100, height: height - 90 };
  const semilog = spec.semilogy !== false;
  const ySeries = spec.overlayNormal ? [data.sigmaPsi, data.normal] : [data.sigmaPsi];
  const [xLo, xHi] = range([data.y]);
  const xScale = linearScale(xLo, xHi, rect.x, rect.x + rect.width);
  const yScale: Scale = semilog
    ? (() => {
        const [lo, hi] = positiveRange(ySeries);
        return logScale(lo, hi, rect.y + rect.height, rect.y);
      })()
    : (() => {
        const [lo, hi] = range(ySeries);
        return linearScale(lo, hi, rect.y + rect.height, rect.y);
      })();
  const panel = new Panel(rect, xScale, yScale, "standardized-density");
  panel.axes("(F - mean)/width", "width * density");
  panel.series("standardized-density", data.y, data.sigmaPsi, COLORS[0]);
  if (spec.overlayNormal) panel.series("normal-overlay", data.y, data.normal, "#222222", true);
  panel.title("standardized fitness density");
  return document(width, height, panel.toString());
}

function renderPanels(spec: FigureSpec): string {
  const panelsData = spec.inputs.map((p) => readDensityPanels(p));
  const width = spec.width ?? 300 * spec.inputs.length + 60;
  const height = spec.height ?? 420;
  const parts: string[] = [];
  panelsData.forEach((data, idx) => {
    const rect = {
      x: 60 + idx * ((width - 80) / panelsData.length),
      y: 30,
      width: (width - 80) / panelsData.length - 30,
      height: height - 90,
    };
    const times = [...data.byTime.keys()].sort((a, b) => a - b);
    const xs = times.map((t) => data.byTime.get(t)!.dF);
    const ys = times.map((t) => data.byTime.get(t)!.psi);
    const [xLo, xHi] = range(xs);
    const xScale = linearScale(xLo, xHi, rect.x, rect.x + rect.width);
    const semilog = spec.semilogy !== false;
    const yScale = semilog
      ? (() => {
          const [lo, hi] = positiveRange(ys);
          return logScale(lo, hi, rect.y + rect.height, rect.y);
        })()
      : (() => {
          const [lo, hi] = range(ys);
          return linearScale(lo, hi, rect.y + rect.height, rect.y);
        })();
    const label = spec.panelLabels?.[idx] ?? `panel ${idx + 1}`;
    const panel = new Panel(rect, xScale, yScale, label);
    panel.axes("F - mean", "density");
    times.forEach((t, j) => {
      const s = data.byTime.get(t)!;
      panel.series(`t=${t}`, s.dF, s.psi, COLORS[j % COLORS.length]);
    });
    panel.title(label);
    parts.push(panel.toString());
  });
  return document(width, height, parts.join(""));
}

function renderGrowth(spec: FigureSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 420;
  const rect = { x: 70, y: 30, width: width - 100, height: height - 90 };
  const series = spec.inputs.map((p) => readGrowthSeries(p));
  const [tLo, tHi] = positiveRange(series.map((s) => s.t));
  const xScale = logScale(tLo, tHi, rect.x, rect.x + rect.width);
  const [yLo, yHi] = range(series.map((s) => [...s.statistic, s.target]));
  const yScale = linearScale(yLo, yHi, rect.y + rect.height, rect.y);
  const panel = new Panel(rect, xScale, yScale, "growth-exponents");
  panel.axes("t", "normalized growth");
  series.forEach((s, idx) => {
    const label = spec.panelLabels?.[idx] ?? `run ${idx + 1}`;
    panel.series(label, s.t, s.statistic, COLORS[idx % COLORS.length]);
    panel.series(`${label}-target`, [tLo, tHi], [s.target, s.target], COLORS[idx % COLORS.length], true);
  });
  panel.title("growth statistic vs generation");
  return document(width, height, panel.toString());
}

export function render(spec: FigureSpec): string {
  switch (spec.kind) {
    case "standardized-density":
      return renderStandardized(spec);
    case "density-panels":
      return renderPanels(spec);
    case "growth-exponents":
      return renderGrowth(spec);
  }
}
