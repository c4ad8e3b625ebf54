import { mkdtempSync, existsSync, readFileSync, rmSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { afterAll, describe, expect, it } from "vitest";

import { EmptyInputError, SchemaError, parseCsv } from "../src/csv.js";
import {
  renderBars,
  renderCensus,
  renderHeatmap,
  renderSweep,
  renderTrajectories,
} from "../src/figures.js";
import { main, parseArgs, UsageError } from "../src/plot.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function fixture(name: string) {
  return parseCsv(readFileSync(join(FIXTURES, name), "utf-8"), name);
}

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

const tmp = mkdtempSync(join(tmpdir(), "repq-plots-"));
afterAll(() => rmSync(tmp, { recursive: true, force: true }));

describe("bars", () => {
  it("renders one bar per (b, norm) cell", () => {
    const svg = renderBars(fixture("sweep_bars.csv"));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(count(svg, '<rect class="bar"')).toBe(6); // 3 ratios x 2 norms
  });

  it("is deterministic", () => {
    const a = renderBars(fixture("sweep_bars.csv"));
    const b = renderBars(fixture("sweep_bars.csv"));
    expect(a).toBe(b);
  });

  it("aborts on missing columns, naming them", () => {
    expect(() => renderBars(fixture("sweep_missing_column.csv"))).toThrowError(
      /coop_final/
    );
  });

  it("aborts on empty input", () => {
    expect(() => renderBars(fixture("sweep_empty.csv"))).toThrowError(EmptyInputError);
  });
});

describe("sweep", () => {
  it("draws a mean line and band per norm", () => {
    const svg = renderSweep(fixture("sweep_curves.csv"));
    expect(count(svg, "<polyline")).toBe(2);
    expect(count(svg, "<polygon")).toBe(2);
  });

  it("is deterministic", () => {
    expect(renderSweep(fixture("sweep_curves.csv"))).toBe(
      renderSweep(fixture("sweep_curves.csv"))
    );
  });
});

describe("trajectories", () => {
  it("overlays per-run curves plus the bold mean", () => {
    const tables = [1, 2, 3].map((k) => fixture(`episodes_run${k}.csv`));
    const svg = renderTrajectories(tables);
    expect(count(svg, 'class="run"')).toBe(3);
    expect(count(svg, 'class="mean"')).toBe(1);
  });

  it("requires the episode schema", () => {
    expect(() => renderTrajectories([fixture("sweep_bars.csv")])).toThrowError(SchemaError);
  });
});

describe("census", () => {
  it("renders sixteen code bars", () => {
    const svg = renderCensus([fixture("episodes_run1.csv"), fixture("episodes_run2.csv")], "rule");
    expect(count(svg, '<rect class="bar"')).toBe(16);
  });

  it("reads norm censuses from decentralized output", () => {
    const svg = renderCensus([fixture("episodes_decentralized.csv")], "norm");
    expect(count(svg, '<rect class="bar"')).toBe(16);
  });

  it("aborts with column diagnostics when norm census is absent", () => {
    try {
      renderCensus([fixture("episodes_run1.csv")], "norm");
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      expect((err as SchemaError).missing).toContain("norm_census_0");
    }
  });
});

describe("heatmap", () => {
  it("renders one cell per matrix point", () => {
    const svg = renderHeatmap(fixture("sweep_matrix.csv"));
    expect(count(svg, '<rect class="cell"')).toBe(12); // 3 fractions x 4 alphas
  });

  it("is deterministic", () => {
    expect(renderHeatmap(fixture("sweep_matrix.csv"))).toBe(
      renderHeatmap(fixture("sweep_matrix.csv"))
    );
  });
});

describe("cli", () => {
  it("parses kind, inputs, output, and labels", () => {
    const args = parseArgs([
      "census", "--in", "a.csv", "b.csv", "--out", "x.svg", "--field", "norm",
      "--title", "T",
    ]);
    expect(args.kind).toBe("census");
    expect(args.inputs).toEqual(["a.csv", "b.csv"]);
    expect(args.field).toBe("norm");
  });

  it("rejects unknown kinds and non-svg outputs", () => {
    expect(() => parseArgs(["pie", "--in", "a.csv", "--out", "x.svg"])).toThrowError(UsageError);
    expect(() => parseArgs(["bars", "--in", "a.csv", "--out", "x.png"])).toThrowError(UsageError);
  });

  it("writes identical bytes on rerun", () => {
    const out1 = join(tmp, "fig_a.svg");
    const out2 = join(tmp, "fig_b.svg");
    const input = join(FIXTURES, "sweep_bars.csv");
    expect(main(["bars", "--in", input, "--out", out1])).toBe(0);
    expect(main(["bars", "--in", input, "--out", out2])).toBe(0);
    expect(readFileSync(out1, "utf-8")).toBe(readFileSync(out2, "utf-8"));
  });

  it("exits nonzero without writing when the schema mismatches", () => {
    const out = join(tmp, "bad.svg");
    const code = main(["bars", "--in", join(FIXTURES, "sweep_missing_column.csv"), "--out", out]);
    expect(code).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("exits nonzero on empty input", () => {
    const out = join(tmp, "empty.svg");
    const code = main(["sweep", "--in", join(FIXTURES, "sweep_empty.csv"), "--out", out]);
    expect(code).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("renders every figure kind end to end", () => {
    const jobs: Array<[string, string[]]> = [
      ["bars", [join(FIXTURES, "sweep_bars.csv")]],
      ["sweep", [join(FIXTURES, "sweep_curves.csv")]],
      ["trajectories", [1, 2, 3].map((k) => join(FIXTURES, `episodes_run${k}.csv`))],
      ["census", [join(FIXTURES, "episodes_decentralized.csv")]],
      ["heatmap", [join(FIXTURES, "sweep_matrix.csv")]],
    ];
    for (const [kind, inputs] of jobs) {
      const out = join(tmp, `${kind}.svg`);
      expect(main([kind, "--in", ...inputs, "--out", out])).toBe(0);
      expect(readFileSync(out, "utf-8")).toContain("</svg>");
    }
  });
});
