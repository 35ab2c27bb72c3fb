/**
 * Minimal deterministic SVG scenes: fixed fonts and sizes, explicit tick
 * placement, and data-role attributes so tests can assert the structure.
 */

export interface Scale {
  toPixel(value: number): number;
  ticks(): number[];
  label(value: number): string;
  readonly log: boolean;
}

export function linearScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const span = hi - lo || 1;
  const step = niceStep(span);
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-9 * Math.abs(step); v += step) ticks.push(roundTick(v));
  return {
    log: false,
    toPixel: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks: () => ticks,
    label: (v) => formatTick(v),
  };
}

export function logScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const ticks: number[] = [];
  for (let d = Math.ceil(llo); d <= Math.floor(lhi); d += 1) ticks.push(Math.pow(10, d));
  return {
    log: true,
    toPixel: (v) => pxLo + ((Math.log10(v) - llo) / span) * (pxHi - pxLo),
    ticks: () => ticks,
    label: (v) => `1e${Math.round(Math.log10(v))}`,
  };
}

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function roundTick(v: number): number {
  return Math.abs(v) < 1e-12 ? 0 : Number(v.toPrecision(12));
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(6)));
}

export interface PanelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export class Panel {
  private parts: string[] = [];

  constructor(
    readonly rect: PanelRect,
    readonly xScale: Scale,
    readonly yScale: Scale,
    readonly name: string,
  ) {}

  axes(xLabel: string, yLabel: string): void {
    const { x, y, width, height } = this.rect;
    const bottom = y + height;
    const xt = this.xScale
      .ticks()
      .map((v) => {
        const px = this.xScale.toPixel(v);
        return (
          `<line x1="${fmt(px)}" y1="${fmt(bottom)}" x2="${fmt(px)}" y2="${fmt(bottom + 4)}" stroke="black"/>` +
          `<text x="${fmt(px)}" y="${fmt(bottom + 16)}" text-anchor="middle" font-size="10">${this.xScale.label(v)}</text>`
        );
      })
      .join("");
    const yt = this.yScale
      .ticks()
      .map((v) => {
        const py = this.yScale.toPixel(v);
        return (
          `<line x1="${fmt(x - 4)}" y1="${fmt(py)}" x2="${fmt(x)}" y2="${fmt(py)}" stroke="black"/>` +
          `<text x="${fmt(x - 6)}" y="${fmt(py + 3)}" text-anchor="end" font-size="10">${this.yScale.label(v)}</text>`
        );
      })
      .join("");
    this.parts.push(
      `<g data-role="axis-x" data-scale="${this.xScale.log ? "log" : "linear"}">` +
        `<line x1="${fmt(x)}" y1="${fmt(bottom)}" x2="${fmt(x + width)}" y2="${fmt(bottom)}" stroke="black"/>` +
        `${xt}<text data-role="axis-label" x="${fmt(x + width / 2)}" y="${fmt(bottom + 30)}" text-anchor="middle" font-size="11">${xLabel}</text></g>`,
    );
    this.parts.push(
      `<g data-role="axis-y" data-scale="${this.yScale.log ? "log" : "linear"}">` +
        `<line x1="${fmt(x)}" y1="${fmt(y)}" x2="${fmt(x)}" y2="${fmt(bottom)}" stroke="black"/>` +
        `${yt}<text data-role="axis-label" x="${fmt(x - 34)}" y="${fmt(y + height / 2)}" text-anchor="middle" font-size="11" transform="rotate(-90 ${fmt(x - 34)} ${fmt(y + height / 2)})">${yLabel}</text></g>`,
    );
  }

  series(name: string, xs: number[], ys: number[], color: string, dashed = false): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i += 1) {
      if (!this.plottable(ys[i])) continue;
      pts.push(`${fmt(this.xScale.toPixel(xs[i]))},${fmt(this.yScale.toPixel(ys[i]))}`);
    }
    const dash = dashed ? ' stroke-dasharray="5,3"' : "";
    this.parts.push(
      `<polyline data-role="series" data-name="${name}" fill="none" stroke="${color}"${dash} points="${pts.join(" ")}"/>`,
    );
  }

  private plottable(y: number): boolean {
    return Number.isFinite(y) && (!this.yScale.log || y > 0);
  }

  title(text: string): void {
    this.parts.push(
      `<text data-role="panel-title" x="${fmt(this.rect.x + this.rect.width / 2)}" y="${fmt(this.rect.y - 6)}" text-anchor="middle" font-size="12">${text}</text>`,
    );
  }

  toString(): string {
    return `<g data-role="panel" data-name="${this.name}">${this.parts.join("")}</g>`;
  }
}

function fmt(v: number): string {
  return v.toFixed(2);
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, sans-serif">` +
    `<rect width="${width}" height="${height}" fill="white"/>${body}</svg>`
  );
}
