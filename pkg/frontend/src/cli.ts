/**
 * Plot tool: render an experiment CSV as an SVG figure.
 *
 * Usage:
 *   node dist/cli.js --csv results.csv --out figure.svg --kind convergence --group scheme
 *   node dist/cli.js --csv truncation.csv --out figure.svg --kind truncation
 */

import { readFileSync, writeFileSync } from "node:fs";

import { parseResultsCsv } from "./csv";
import { PlotKind, renderPlot } from "./plot";

interface Args {
  csv: string;
  out: string;
  kind: PlotKind;
  group?: string;
}

function parseArgs(argv: string[]): Args {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near ${JSON.stringify(flag)}`);
    }
    values.set(flag.slice(2), value);
  }
  const csv = values.get("csv");
  const out = values.get("out");
  const kind = values.get("kind");
  if (!csv || !out || !kind) {
    throw new Error("required flags: --csv PATH --out PATH --kind convergence|truncation");
  }
  if (kind !== "convergence" && kind !== "truncation") {
    throw new Error(`--kind must be convergence or truncation, got ${JSON.stringify(kind)}`);
  }
  return { csv, out, kind, group: values.get("group") };
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const rows = parseResultsCsv(readFileSync(args.csv, "utf-8"));
    const figure = renderPlot(rows, { kind: args.kind, groupBy: args.group });
    writeFileSync(args.out, figure.svg);
    console.log(`wrote ${args.out} (${figure.pixelSeries.size} series)`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (require.main === module) {
  process.exitCode = main(process.argv.slice(2));
}
