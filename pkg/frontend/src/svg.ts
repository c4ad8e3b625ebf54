/**
 * Hand-rolled SVG chart scaffolding: deterministic output, fixed styling,
 * no timestamps, no external renderer.
 */

export const WIDTH = 760;
export const HEIGHT = 480;
export const MARGIN = { top: 48, right: 32, bottom: 64, left: 72 };

export const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
export const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

export const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f4a261", "#7b2cbf",
  "#0096c7", "#d62828", "#588157", "#fb8500", "#6c757d",
];

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

/** Fixed-precision coordinate formatting keeps output byte-stable. */
export function fmt(v: number): string {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

export function fmtValue(v: number): string {
  if (Number.isInteger(v)) return String(v);
  const a = Math.abs(v);
  if (a >= 100 || (a < 0.01 && a > 0)) return v.toExponential(1);
  return String(Math.round(v * 1000) / 1000);
}

export interface Scale {
  (v: number): number;
  min: number;
  max: number;
}

export function linearScale(min: number, max: number, rangeMin: number, rangeMax: number): Scale {
  const span = max - min || 1;
  const fn = ((v: number) => rangeMin + ((v - min) / span) * (rangeMax - rangeMin)) as Scale;
  fn.min = min;
  fn.max = max;
  return fn;
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export interface Labels {
  title: string;
  xLabel: string;
  yLabel: string;
}

export function open(labels: Labels): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-size="17" fill="#212529">${esc(labels.title)}</text>`,
    `<text x="${MARGIN.left + PLOT_W / 2}" y="${HEIGHT - 16}" text-anchor="middle" font-size="13" fill="#495057">${esc(labels.xLabel)}</text>`,
    `<text x="20" y="${MARGIN.top + PLOT_H / 2}" text-anchor="middle" font-size="13" fill="#495057" transform="rotate(-90 20 ${MARGIN.top + PLOT_H / 2})">${esc(labels.yLabel)}</text>`,
  ];
}

export function close(parts: string[]): string {
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function frame(): string {
  return `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#adb5bd" stroke-width="1"/>`;
}

export function yAxis(parts: string[], scale: Scale, format: (v: number) => string = fmtValue): void {
  for (const t of niceTicks(scale.min, scale.max, 6)) {
    const y = scale(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + PLOT_W}" y2="${fmt(y)}" stroke="#e9ecef" stroke-width="1"/>`,
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11" fill="#495057">${esc(format(t))}</text>`
    );
  }
}

export function xAxisTicks(parts: string[], scale: Scale, ticks: number[], format: (v: number) => string = fmtValue): void {
  for (const t of ticks) {
    const x = scale(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top + PLOT_H}" x2="${fmt(x)}" y2="${MARGIN.top + PLOT_H + 5}" stroke="#495057" stroke-width="1"/>`,
      `<text x="${fmt(x)}" y="${MARGIN.top + PLOT_H + 20}" text-anchor="middle" font-size="11" fill="#495057">${esc(format(t))}</text>`
    );
  }
}

export function polyline(points: Array<[number, number]>, color: string, width: number, opacity = 1, cls = ""): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  const klass = cls ? ` class="${cls}"` : "";
  return `<polyline${klass} points="${pts}" fill="none" stroke="${color}" stroke-width="${width}" stroke-opacity="${opacity}" stroke-linejoin="round"/>`;
}

export function polygon(points: Array<[number, number]>, color: string, opacity: number): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polygon points="${pts}" fill="${color}" fill-opacity="${opacity}" stroke="none"/>`;
}

export function legend(parts: string[], entries: Array<[string, string]>): void {
  let x = MARGIN.left + 12;
  const y = MARGIN.top + 14;
  for (const [label, color] of entries) {
    parts.push(
      `<rect x="${fmt(x)}" y="${y - 9}" width="12" height="12" fill="${color}"/>`,
      `<text x="${fmt(x + 17)}" y="${y + 2}" font-size="12" fill="#212529">${esc(label)}</text>`
    );
    x += 17 + 8 * label.length + 28;
  }
}

/** Two-stop blue-to-red ramp for heatmap cells. */
export function heatColor(t: number): string {
  const clamp = Math.max(0, Math.min(1, t));
  const lerp = (a: number, b: number) => Math.round(a + (b - a) * clamp);
  return `rgb(${lerp(49, 230)},${lerp(97, 57)},${lerp(238, 70)})`;
}
