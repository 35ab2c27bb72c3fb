/**
 * Readers for the documented CSV schemas emitted by the simulation CLI.
 * Each reader validates its header and reports the offending row/column
 * on malformed input.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

function rows(path: string): string[][] {
  const text = readFileSync(path, "utf8");
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function requireHeader(path: string, got: string[], want: string[]): void {
  if (got.length !== want.length || want.some((w, i) => got[i] !== w)) {
    throw new SchemaError(
      `${path}: expected header '${want.join(",")}' but found '${got.join(",")}'`,
    );
  }
}

function num(path: string, row: number, col: number, value: string): number {
  const x = Number(value);
  if (!Number.isFinite(x)) {
    throw new SchemaError(`${path}: row ${row + 1}, column ${col + 1}: '${value}' is not a finite number`);
  }
  return x;
}

export interface StandardizedDensity {
  y: number[];
  sigmaPsi: number[];
  normal: number[];
}

/** fig1_standardized.csv: y, sigma_psi, normal */
export function readStandardizedDensity(path: string): StandardizedDensity {
  const all = rows(path);
  if (all.length === 0) throw new SchemaError(`${path}: empty file`);
  requireHeader(path, all[0], ["y", "sigma_psi", "normal"]);
  const body = all.slice(1);
  if (body.length === 0) throw new SchemaError(`${path}: no data rows`);
  const out: StandardizedDensity = { y: [], sigmaPsi: [], normal: [] };
  body.forEach((r, i) => {
    if (r.length !== 3) throw new SchemaError(`${path}: row ${i + 2}: expected 3 columns, found ${r.length}`);
    out.y.push(num(path, i + 1, 0, r[0]));
    out.sigmaPsi.push(num(path, i + 1, 1, r[1]));
    out.normal.push(num(path, i + 1, 2, r[2]));
  });
  return out;
}

export interface DensityPanels {
  /** generation -> (dF, psi) points in file order */
  byTime: Map<number, { dF: number[]; psi: number[] }>;
}

/** fig2_panels.csv: t, dF, psi (long format, one series per generation) */
export function readDensityPanels(path: string): DensityPanels {
  const all = rows(path);
  if (all.length === 0) throw new SchemaError(`${path}: empty file`);
  requireHeader(path, all[0], ["t", "dF", "psi"]);
  const body = all.slice(1);
  if (body.length === 0) throw new SchemaError(`${path}: no data rows`);
  const byTime = new Map<number, { dF: number[]; psi: number[] }>();
  body.forEach((r, i) => {
    if (r.length !== 3) throw new SchemaError(`${path}: row ${i + 2}: expected 3 columns, found ${r.length}`);
    const t = num(path, i + 1, 0, r[0]);
    let series = byTime.get(t);
    if (!series) {
      series = { dF: [], psi: [] };
      byTime.set(t, series);
    }
    series.dF.push(num(path, i + 1, 1, r[1]));
    series.psi.push(num(path, i + 1, 2, r[2]));
  });
  return { byTime };
}

export interface GrowthSeries {
  t: number[];
  statistic: number[];
  target: number;
}

/** growth_exponents.csv: t, statistic, target */
export function readGrowthSeries(path: string): GrowthSeries {
  const all = rows(path);
  if (all.length === 0) throw new SchemaError(`${path}: empty file`);
  requireHeader(path, all[0], ["t", "statistic", "target"]);
  const body = all.slice(1);
  if (body.length === 0) throw new SchemaError(`${path}: no data rows`);
  const out: GrowthSeries = { t: [], statistic: [], target: NaN };
  body.forEach((r, i) => {
    if (r.length !== 3) throw new SchemaError(`${path}: row ${i + 2}: expected 3 columns, found ${r.length}`);
    out.t.push(num(path, i + 1, 0, r[0]));
    out.statistic.push(num(path, i + 1, 1, r[1]));
    out.target = num(path, i + 1, 2, r[2]);
  });
  return out;
}
