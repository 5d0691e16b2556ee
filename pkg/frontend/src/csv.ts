export interface Table {
  columns: string[];
  /** One entry per data row; blank cells become null. */
  rows: (number | null)[][];
}

export class InputError extends Error {}

export function parseCsv(text: string, path: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new InputError(`${path}: file is empty`);
  }
  const columns = lines[0]!.split(',');
  const rows: (number | null)[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i]!.split(',');
    if (cells.length !== columns.length) {
      throw new InputError(
        `${path}: row ${i + 1} has ${cells.length} cells, header has ${columns.length}`,
      );
    }
    rows.push(
      cells.map((c) => {
        if (c === '') return null;
        const v = Number(c);
        if (Number.isNaN(v)) {
          throw new InputError(`${path}: row ${i + 1} has non-numeric cell ${JSON.stringify(c)}`);
        }
        return v;
      }),
    );
  }
  if (rows.length === 0) {
    throw new InputError(`${path}: trace has no data rows`);
  }
  return { columns, rows };
}

export function requireColumn(table: Table, name: string, path: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new InputError(
      `${path}: required column ${JSON.stringify(name)} missing from header ` +
        `[${table.columns.join(', ')}]`,
    );
  }
  return idx;
}

export interface Series {
  label: string;
  /** [k, value] pairs; nulls already dropped. */
  points: [number, number][];
}

/** Pull (k, column) pairs out of a parsed table, skipping blank cells. */
export function extractSeries(table: Table, column: string, label: string, path: string): Series {
  const kIdx = requireColumn(table, 'k', path);
  const vIdx = requireColumn(table, column, path);
  const points: [number, number][] = [];
  for (const row of table.rows) {
    const k = row[kIdx];
    const v = row[vIdx];
    if (k == null || v == null) continue;
    points.push([k, v]);
  }
  if (points.length === 0) {
    throw new InputError(`${path}: column ${JSON.stringify(column)} has no values`);
  }
  return { label, points };
}

/** A solver trace: value_gap against k. */
export function traceSeries(text: string, path: string, label: string): Series {
  return extractSeries(parseCsv(text, path), 'value_gap', label, path);
}

/** A comparison table: every value_gap_* column becomes its own series. */
export function compareSeries(text: string, path: string): Series[] {
  const table = parseCsv(text, path);
  const names = table.columns.filter((c) => c.startsWith('value_gap_'));
  if (names.length === 0) {
    throw new InputError(`${path}: no value_gap_* columns in header [${table.columns.join(', ')}]`);
  }
  return names.map((c) => extractSeries(table, c, c.slice('value_gap_'.length), path));
}
