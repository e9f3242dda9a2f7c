import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { main } from "../src/cli";
import { COLUMNS, ResultRow, parseResultsCsv } from "../src/csv";
import { buildSeries, plotConvergence, plotTruncation, renderPlot } from "../src/plot";

const fixturePath = (name: string) => join(__dirname, "fixtures", name);

function syntheticRow(n: number, err: number, overrides: Partial<ResultRow> = {}): ResultRow {
  return {
    experiment: "convergence",
    scheme: "cdv4",
    epsilon: 1.0,
    cutoff: 16.0,
    n,
    dt: 1.0 / n,
    err_weighted: err,
    err_pointwise_region: err,
    im_residue: err / 10,
    wall_ms: 1.0,
    ...overrides,
  };
}

describe("convergence figures", () => {
  it("places synthetic n^-4 data collinear with the slope -4 reference", () => {
    const rows = [1, 2, 4, 8, 16, 32].map((n) => syntheticRow(n, Math.pow(n, -4)));
    const figure = plotConvergence(rows, { kind: "convergence", referenceSlopes: [4] });
    const points = figure.pixelSeries.get("cdv4")!;
    expect(points).toHaveLength(6);
    const ref = figure.referenceLines[0];
    const refSlope = (ref.end.y - ref.start.y) / (ref.end.x - ref.start.x);
    // every marker sits on the reference line itself
    for (const p of points) {
      const expected = ref.start.y + refSlope * (p.x - ref.start.x);
      expect(Math.abs(p.y - expected)).toBeLessThan(1e-9);
    }
    // and the fitted pixel slope matches the drawn reference exactly
    const first = points[0];
    const last = points[points.length - 1];
    const fitted = (last.y - first.y) / (last.x - first.x);
    expect(Math.abs(fitted - refSlope)).toBeLessThan(1e-9);
  });

  it("renders one series per epsilon for robustness data", () => {
    const rows = parseResultsCsv(readFileSync(fixturePath("robustness_sample.csv"), "utf-8"));
    const figure = plotConvergence(rows, { kind: "convergence", groupBy: "epsilon" });
    expect([...figure.pixelSeries.keys()].sort()).toEqual(["0.125", "1"]);
    expect(figure.svg).toContain("<svg");
    expect(figure.svg).toContain("slope -4");
  });

  it("rejects an unknown grouping column by name", () => {
    const rows = [syntheticRow(1, 1.0)];
    expect(() => plotConvergence(rows, { kind: "convergence", groupBy: "bogus" })).toThrow(/bogus/);
  });

  it("refuses to render when nothing is plottable", () => {
    expect(() => renderPlot([], { kind: "convergence" })).toThrow(/no plottable rows/);
    const nanRows = [syntheticRow(1, Number.NaN)];
    expect(() => renderPlot(nanRows, { kind: "convergence" })).toThrow(/no plottable rows/);
  });
});

describe("truncation figures", () => {
  it("renders the harness truncation fixture", () => {
    const rows = parseResultsCsv(readFileSync(fixturePath("truncation_sample.csv"), "utf-8"));
    const figure = plotTruncation(rows, { kind: "truncation" });
    const points = figure.pixelSeries.get("all")!;
    expect(points).toHaveLength(3);
    // bounded curve: growing the domain moves the error by at most a factor 2
    const errs = rows.map((r) => r.err_weighted);
    expect(Math.max(...errs) / Math.min(...errs)).toBeLessThan(2.0);
    expect(figure.svg).toContain("domain cutoff");
  });

  it("handles a single-row file with a single marker", () => {
    const rows = [syntheticRow(8, 2.2e-5, { experiment: "truncation", cutoff: 16.0 })];
    const figure = plotTruncation(rows, { kind: "truncation" });
    expect(figure.pixelSeries.get("all")).toHaveLength(1);
    expect((figure.svg.match(/<circle/g) ?? []).length).toBe(1);
  });
});

describe("series construction", () => {
  it("sorts points by the x column", () => {
    const rows = [syntheticRow(8, 1e-4), syntheticRow(2, 1e-2), syntheticRow(4, 1e-3)];
    const [series] = buildSeries(rows, "n", "scheme");
    expect(series.points.map((p) => p.x)).toEqual([2, 4, 8]);
  });
});

describe("command line", () => {
  it("renders a figure end to end", () => {
    const out = join(mkdtempSync(join(tmpdir(), "plots-")), "fig.svg");
    const code = main([
      "--csv", fixturePath("robustness_sample.csv"),
      "--out", out,
      "--kind", "convergence",
      "--group", "epsilon",
    ]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("</svg>");
  });

  it("fails without writing a file when the CSV has no rows", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const csv = join(dir, "empty.csv");
    writeFileSync(csv, COLUMNS.join(",") + "\n");
    const out = join(dir, "fig.svg");
    const code = main(["--csv", csv, "--out", out, "--kind", "convergence"]);
    expect(code).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(main(["--csv", "x.csv", "--out", "y.svg", "--kind", "pie"])).toBe(1);
    expect(main(["--csv", "x.csv"])).toBe(1);
  });
});
