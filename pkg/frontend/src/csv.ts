/**
 * Reader for the experiment harness result CSVs.
 *
 * The writer emits a fixed column set, never quotes fields, and prints
 * floats in shortest round-trip form, so parsing is a header check plus
 * Number() per cell.
 */

export const COLUMNS = [
  "experiment",
  "scheme",
  "epsilon",
  "cutoff",
  "n",
  "dt",
  "err_weighted",
  "err_pointwise_region",
  "im_residue",
  "wall_ms",
] as const;

export type ColumnName = (typeof COLUMNS)[number];

export interface ResultRow {
  experiment: string;
  scheme: string;
  epsilon: number;
  cutoff: number;
  n: number;
  dt: number;
  err_weighted: number;
  err_pointwise_region: number;
  im_residue: number;
  wall_ms: number;
}

const NUMERIC_COLUMNS: ColumnName[] = [
  "epsilon",
  "cutoff",
  "n",
  "dt",
  "err_weighted",
  "err_pointwise_region",
  "im_residue",
  "wall_ms",
];

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV: no header line");
  }
  const header = lines[0].split(",");
  const missing = COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new Error(`missing columns: ${missing.join(", ")}`);
  }
  const index = new Map(header.map((name, i) => [name, i] as const));
  const rows: ResultRow[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`malformed row (${cells.length} cells, expected ${header.length}): ${line}`);
    }
    const cell = (name: ColumnName) => cells[index.get(name)!];
    const row: ResultRow = {
      experiment: cell("experiment"),
      scheme: cell("scheme"),
      epsilon: Number(cell("epsilon")),
      cutoff: Number(cell("cutoff")),
      n: Number(cell("n")),
      dt: Number(cell("dt")),
      err_weighted: Number(cell("err_weighted")),
      err_pointwise_region: Number(cell("err_pointwise_region")),
      im_residue: Number(cell("im_residue")),
      wall_ms: Number(cell("wall_ms")),
    };
    for (const name of NUMERIC_COLUMNS) {
      const value = row[name];
      if (Number.isNaN(value) && cell(name) !== "nan") {
        throw new Error(`non-numeric value ${JSON.stringify(cell(name))} in column ${name}`);
      }
    }
    rows.push(row);
  }
  return rows;
}

/** Serialize rows back to CSV (values only; formatting may differ from Python's). */
export function serializeRows(rows: ResultRow[]): string {
  const body = rows.map((row) =>
    [
      row.experiment,
      row.scheme,
      String(row.epsilon),
      String(row.cutoff),
      String(row.n),
      String(row.dt),
      String(row.err_weighted),
      String(row.err_pointwise_region),
      String(row.im_residue),
      String(row.wall_ms),
    ].join(","),
  );
  return [COLUMNS.join(","), ...body].join("\n") + "\n";
}
