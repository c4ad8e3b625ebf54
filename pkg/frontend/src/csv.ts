/**
 * Minimal CSV handling for the simulator's published output schemas.
 * Inputs are trusted numeric tables (no quoting or embedded commas).
 */

export interface Table {
  columns: string[];
  rows: string[][];
}

/** Raised when an input file does not match the expected schema. */
export class SchemaError extends Error {
  readonly missing: string[];

  constructor(context: string, missing: string[]) {
    super(
      `${context}: missing required column${missing.length > 1 ? "s" : ""} ` +
        missing.map((c) => `'${c}'`).join(", ")
    );
    this.name = "SchemaError";
    this.missing = missing;
  }
}

export class EmptyInputError extends Error {
  constructor(context: string) {
    super(`${context}: no data rows`);
    this.name = "EmptyInputError";
  }
}

export function parseCsv(text: string, context: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new EmptyInputError(context);
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new Error(`${context}: row has ${row.length} fields, header has ${columns.length}`);
    }
  }
  return { columns, rows };
}

export function requireColumns(table: Table, needed: string[], context: string): void {
  const have = new Set(table.columns);
  const missing = needed.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new SchemaError(context, missing);
  }
  if (table.rows.length === 0) {
    throw new EmptyInputError(context);
  }
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError("table", [name]);
  }
  return table.rows.map((r) => Number(r[idx]));
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError("table", [name]);
  }
  return table.rows.map((r) => r[idx]);
}

/** Distinct values in first-appearance order. */
export function distinct(values: string[]): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const v of values) {
    if (!seen.has(v)) {
      seen.add(v);
      out.push(v);
    }
  }
  return out;
}

export function mean(values: number[]): number {
  let total = 0;
  for (const v of values) total += v;
  return total / values.length;
}

export function std(values: number[]): number {
  const m = mean(values);
  let total = 0;
  for (const v of values) total += (v - m) * (v - m);
  return Math.sqrt(total / values.length);
}
