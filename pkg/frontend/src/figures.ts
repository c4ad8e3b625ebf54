/**
 * The five figure kinds, rendered from the simulator's published CSV
 * schemas only: the sweep table (one row per run) and the per-episode
 * table (one row per recorded episode, censuses included).
 */

import {
  EmptyInputError,
  SchemaError,
  Table,
  distinct,
  mean,
  numericColumn,
  requireColumns,
  std,
  stringColumn,
} from "./csv.js";
import {
  Labels,
  MARGIN,
  PALETTE,
  PLOT_H,
  PLOT_W,
  close,
  fmt,
  fmtValue,
  frame,
  heatColor,
  legend,
  linearScale,
  open,
  polygon,
  polyline,
  xAxisTicks,
  yAxis,
} from "./svg.js";

const SWEEP_COLUMNS = ["b", "seed_fraction", "alpha", "norm", "mode", "run_index", "coop_final"];

interface SeriesPoint {
  x: number;
  mean: number;
  std: number;
}

function groupRuns(xs: number[], series: string[], values: number[]): Map<string, Map<number, number[]>> {
  const out = new Map<string, Map<number, number[]>>();
  for (let i = 0; i < values.length; i++) {
    const byX = out.get(series[i]) ?? new Map<number, number[]>();
    const bucket = byX.get(xs[i]) ?? [];
    bucket.push(values[i]);
    byX.set(xs[i], bucket);
    out.set(series[i], byX);
  }
  return out;
}

/** Grouped bars: mean coop_final per benefit value, one bar per norm. */
export function renderBars(sweep: Table, labels: Partial<Labels> = {}): string {
  requireColumns(sweep, SWEEP_COLUMNS, "sweep input");
  const bs = numericColumn(sweep, "b");
  const norms = stringColumn(sweep, "norm");
  const coop = numericColumn(sweep, "coop_final");

  const groups = distinct(bs.map(String)).map(Number).sort((a, b) => a - b);
  const seriesNames = distinct(norms).sort((a, b) => Number(a) - Number(b));
  const grouped = groupRuns(bs, norms, coop);

  const parts = open({
    title: labels.title ?? "Cooperation by benefit-to-cost ratio",
    xLabel: labels.xLabel ?? "benefit b (c = 1)",
    yLabel: labels.yLabel ?? "cooperation level",
  });
  const yScale = linearScale(0, 1, MARGIN.top + PLOT_H, MARGIN.top);
  yAxis(parts, yScale);
  parts.push(frame());

  const groupWidth = PLOT_W / groups.length;
  const barWidth = Math.min(48, (groupWidth * 0.7) / seriesNames.length);
  groups.forEach((b, gi) => {
    const cx = MARGIN.left + groupWidth * (gi + 0.5);
    seriesNames.forEach((norm, si) => {
      const runs = grouped.get(norm)?.get(b);
      if (!runs) return;
      const m = mean(runs);
      const x = cx + (si - seriesNames.length / 2) * barWidth;
      const y = yScale(m);
      parts.push(
        `<rect class="bar" x="${fmt(x)}" y="${fmt(y)}" width="${fmt(barWidth - 3)}" ` +
          `height="${fmt(yScale(0) - y)}" fill="${PALETTE[si % PALETTE.length]}"/>`
      );
    });
    parts.push(
      `<text x="${fmt(cx)}" y="${MARGIN.top + PLOT_H + 20}" text-anchor="middle" ` +
        `font-size="11" fill="#495057">${fmtValue(b)}</text>`
    );
  });
  legend(parts, seriesNames.map((n, i) => [`norm ${n}`, PALETTE[i % PALETTE.length]]));
  return close(parts);
}

function pickSweepAxis(sweep: Table): string {
  for (const axis of ["seed_fraction", "alpha", "b"]) {
    if (distinct(stringColumn(sweep, axis)).length > 1) return axis;
  }
  return "seed_fraction";
}

/** Mean coop_final with a +-1 std band per series, across the sweep axis. */
export function renderSweep(sweep: Table, labels: Partial<Labels> = {}): string {
  requireColumns(sweep, SWEEP_COLUMNS, "sweep input");
  const axis = pickSweepAxis(sweep);
  const xs = numericColumn(sweep, axis);
  const seriesKeys = stringColumn(sweep, "norm").map(
    (n, i) => `norm ${n}` + (distinct(stringColumn(sweep, "mode")).length > 1 ? ` (${stringColumn(sweep, "mode")[i]})` : "")
  );
  const coop = numericColumn(sweep, "coop_final");
  const grouped = groupRuns(xs, seriesKeys, coop);

  const xValues = distinct(xs.map(String)).map(Number).sort((a, b) => a - b);
  const parts = open({
    title: labels.title ?? `Cooperation across ${axis.replace("_", " ")}`,
    xLabel: labels.xLabel ?? axis.replace("_", " "),
    yLabel: labels.yLabel ?? "cooperation level (mean +- std over runs)",
  });
  const xScale = linearScale(xValues[0], xValues[xValues.length - 1], MARGIN.left, MARGIN.left + PLOT_W);
  const yScale = linearScale(0, 1, MARGIN.top + PLOT_H, MARGIN.top);
  yAxis(parts, yScale);
  xAxisTicks(parts, xScale, xValues);
  parts.push(frame());

  const names = [...grouped.keys()].sort();
  names.forEach((name, si) => {
    const byX = grouped.get(name)!;
    const points: SeriesPoint[] = xValues
      .filter((x) => byX.has(x))
      .map((x) => ({ x, mean: mean(byX.get(x)!), std: std(byX.get(x)!) }));
    const color = PALETTE[si % PALETTE.length];
    const upper = points.map((p): [number, number] => [xScale(p.x), yScale(Math.min(1, p.mean + p.std))]);
    const lower = points.map((p): [number, number] => [xScale(p.x), yScale(Math.max(0, p.mean - p.std))]);
    parts.push(polygon([...upper, ...lower.reverse()], color, 0.15));
    parts.push(polyline(points.map((p) => [xScale(p.x), yScale(p.mean)]), color, 2));
    for (const p of points) {
      parts.push(`<circle cx="${fmt(xScale(p.x))}" cy="${fmt(yScale(p.mean))}" r="3" fill="${color}"/>`);
    }
  });
  legend(parts, names.map((n, i) => [n, PALETTE[i % PALETTE.length]]));
  return close(parts);
}

const EPISODE_COLUMNS = ["episode", "mean_reward", "coop_level"];

/** Per-run cooperation trajectories with the pointwise mean in bold. */
export function renderTrajectories(runs: Table[], labels: Partial<Labels> = {}): string {
  if (runs.length === 0) {
    throw new EmptyInputError("trajectories input");
  }
  runs.forEach((t, i) => requireColumns(t, EPISODE_COLUMNS, `episodes input #${i + 1}`));

  const episodeSets = runs.map((t) => numericColumn(t, "episode"));
  const common = episodeSets
    .slice(1)
    .reduce((acc, eps) => acc.filter((e) => eps.includes(e)), episodeSets[0]);
  if (common.length === 0) {
    throw new Error("trajectories input: runs share no common episode indices");
  }

  const parts = open({
    title: labels.title ?? `Learning trajectories (${runs.length} runs)`,
    xLabel: labels.xLabel ?? "episode",
    yLabel: labels.yLabel ?? "cooperation level",
  });
  const xScale = linearScale(common[0], common[common.length - 1], MARGIN.left, MARGIN.left + PLOT_W);
  const yScale = linearScale(0, 1, MARGIN.top + PLOT_H, MARGIN.top);
  yAxis(parts, yScale);
  xAxisTicks(parts, xScale, [common[0], ...[0.25, 0.5, 0.75, 1].map((f) => common[Math.floor((common.length - 1) * f)])]);
  parts.push(frame());

  const perRun: number[][] = runs.map((t) => {
    const eps = numericColumn(t, "episode");
    const coop = numericColumn(t, "coop_level");
    const index = new Map(eps.map((e, i) => [e, coop[i]]));
    return common.map((e) => index.get(e)!);
  });

  perRun.forEach((coop, ri) => {
    parts.push(
      polyline(
        common.map((e, i) => [xScale(e), yScale(coop[i])]),
        PALETTE[ri % PALETTE.length],
        1,
        0.35,
        "run"
      )
    );
  });
  const avg = common.map((_, i) => mean(perRun.map((r) => r[i])));
  parts.push(polyline(common.map((e, i) => [xScale(e), yScale(avg[i])]), "#212529", 2.5, 1, "mean"));
  return close(parts);
}

/** Final-episode policy census pooled over runs: share per 4-bit code. */
export function renderCensus(
  runs: Table[],
  field: "rule" | "norm",
  labels: Partial<Labels> = {}
): string {
  if (runs.length === 0) {
    throw new EmptyInputError("census input");
  }
  const needed = Array.from({ length: 16 }, (_, k) => `${field}_census_${k}`);
  runs.forEach((t, i) => requireColumns(t, needed, `episodes input #${i + 1}`));

  const counts = new Array<number>(16).fill(0);
  for (const t of runs) {
    const last = t.rows[t.rows.length - 1];
    needed.forEach((col, k) => {
      counts[k] += Number(last[t.columns.indexOf(col)]);
    });
  }
  const total = counts.reduce((a, b) => a + b, 0);
  if (total === 0) {
    throw new EmptyInputError("census input (no learners)");
  }

  const parts = open({
    title: labels.title ?? `Final ${field} census (${runs.length} runs)`,
    xLabel: labels.xLabel ?? `${field} code`,
    yLabel: labels.yLabel ?? "share of learners",
  });
  const yScale = linearScale(0, 1, MARGIN.top + PLOT_H, MARGIN.top);
  yAxis(parts, yScale);
  parts.push(frame());
  const slot = PLOT_W / 16;
  counts.forEach((count, code) => {
    const share = count / total;
    const x = MARGIN.left + slot * code + slot * 0.15;
    parts.push(
      `<rect class="bar" x="${fmt(x)}" y="${fmt(yScale(share))}" width="${fmt(slot * 0.7)}" ` +
        `height="${fmt(yScale(0) - yScale(share))}" fill="${PALETTE[code % PALETTE.length]}"/>`,
      `<text x="${fmt(MARGIN.left + slot * (code + 0.5))}" y="${MARGIN.top + PLOT_H + 20}" ` +
        `text-anchor="middle" font-size="11" fill="#495057">${code}</text>`
    );
  });
  return close(parts);
}

/** seed_fraction x alpha matrix of mean coop_final. */
export function renderHeatmap(sweep: Table, labels: Partial<Labels> = {}): string {
  requireColumns(sweep, SWEEP_COLUMNS, "sweep input");
  const fracs = numericColumn(sweep, "seed_fraction");
  const alphas = numericColumn(sweep, "alpha");
  const coop = numericColumn(sweep, "coop_final");

  const rows = distinct(fracs.map(String)).map(Number).sort((a, b) => a - b);
  const cols = distinct(alphas.map(String)).map(Number).sort((a, b) => a - b);
  const cells = new Map<string, number[]>();
  for (let i = 0; i < coop.length; i++) {
    const key = `${fracs[i]}|${alphas[i]}`;
    const bucket = cells.get(key) ?? [];
    bucket.push(coop[i]);
    cells.set(key, bucket);
  }

  const parts = open({
    title: labels.title ?? "Cooperation: seeding x introspection",
    xLabel: labels.xLabel ?? "introspection weight alpha",
    yLabel: labels.yLabel ?? "seeded fraction",
  });
  const cw = PLOT_W / cols.length;
  const ch = PLOT_H / rows.length;
  rows.forEach((f, ri) => {
    cols.forEach((a, ci) => {
      const runs = cells.get(`${f}|${a}`);
      if (!runs) return;
      const m = mean(runs);
      const x = MARGIN.left + cw * ci;
      const y = MARGIN.top + PLOT_H - ch * (ri + 1);
      parts.push(
        `<rect class="cell" x="${fmt(x)}" y="${fmt(y)}" width="${fmt(cw)}" height="${fmt(ch)}" ` +
          `fill="${heatColor(m)}" stroke="#ffffff" stroke-width="1"/>`,
        `<text x="${fmt(x + cw / 2)}" y="${fmt(y + ch / 2 + 4)}" text-anchor="middle" ` +
          `font-size="11" fill="#ffffff">${fmtValue(Math.round(m * 100) / 100)}</text>`
      );
    });
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(MARGIN.top + PLOT_H - ch * (ri + 0.5) + 4)}" ` +
        `text-anchor="end" font-size="11" fill="#495057">${fmtValue(f)}</text>`
    );
  });
  cols.forEach((a, ci) => {
    parts.push(
      `<text x="${fmt(MARGIN.left + cw * (ci + 0.5))}" y="${MARGIN.top + PLOT_H + 20}" ` +
        `text-anchor="middle" font-size="11" fill="#495057">${fmtValue(a)}</text>`
    );
  });
  parts.push(frame());
  return close(parts);
}
