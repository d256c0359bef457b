/** Minimal CSV reader for the bundle's numeric tables. */

export interface Table {
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 1) {
    throw new Error("empty CSV");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new Error(`row ${i + 1}: expected ${columns.length} cells, got ${parts.length}`);
    }
    return parts.map((p) => {
      const v = Number(p);
      if (!Number.isFinite(v)) {
        throw new Error(`row ${i + 1}: non-finite cell ${JSON.stringify(p)}`);
      }
      return v;
    });
  });
  return { columns, rows };
}

export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column ${JSON.stringify(name)}; have ${table.columns.join(", ")}`);
  }
  return table.rows.map((r) => r[idx]);
}

export function hasColumn(table: Table, name: string): boolean {
  return table.columns.includes(name);
}
