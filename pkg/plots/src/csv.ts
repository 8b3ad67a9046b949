import { readFileSync } from 'fs';
import Papa from 'papaparse';

/** Raised for anything wrong with an artifact: absent, bad columns, bad cells. */
export class ArtifactError extends Error {}

export interface Table {
  path: string;
  header: string[];
  /** One entry per data row, in file order. */
  records: string[][];
}

/** Read a CSV artifact into header + string cells. No type coercion here. */
export function loadCsv(path: string): Table {
  let raw: string;
  try {
    raw = readFileSync(path, 'utf8');
  } catch {
    throw new ArtifactError(`no such artifact file: ${path}`);
  }
  const parsed = Papa.parse<string[]>(raw.trim(), { delimiter: ',' });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new ArtifactError(`${path}: malformed CSV: ${first.message}`);
  }
  const rows = parsed.data.filter((r) => !(r.length === 1 && r[0] === ''));
  if (rows.length === 0) {
    throw new ArtifactError(`${path}: empty file`);
  }
  const [header, ...records] = rows;
  for (const [i, rec] of records.entries()) {
    if (rec.length !== header!.length) {
      throw new ArtifactError(
        `${path}: row ${i + 2} has ${rec.length} cells, header has ${header!.length}`,
      );
    }
  }
  return { path, header: header!, records };
}

/**
 * Enforce that the header carries exactly the documented columns.
 *
 * Order is not significant; a column the artifact lacks or one it was never
 * documented to have each fail with that column's name.
 */
export function requireColumns(table: Table, expected: readonly string[]): void {
  const seen = new Set(table.header);
  for (const name of expected) {
    if (!seen.has(name)) {
      throw new ArtifactError(`${table.path}: missing column '${name}'`);
    }
  }
  const allowed = new Set(expected);
  for (const name of table.header) {
    if (!allowed.has(name)) {
      throw new ArtifactError(`${table.path}: unexpected column '${name}'`);
    }
  }
  if (table.header.length !== new Set(table.header).size) {
    const dup = table.header.find((c, i) => table.header.indexOf(c) !== i);
    throw new ArtifactError(`${table.path}: duplicate column '${dup}'`);
  }
}

/** All values of one column parsed as finite numbers, in row order. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new ArtifactError(`${table.path}: missing column '${name}'`);
  }
  return table.records.map((rec, i) => {
    const cell = rec[idx]!;
    const value = Number(cell);
    if (cell === '' || !Number.isFinite(value)) {
      throw new ArtifactError(
        `${table.path}: row ${i + 2}, column '${name}': not a number: '${cell}'`,
      );
    }
    return value;
  });
}

/** All values of one column as raw strings, in row order. */
export function stringColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new ArtifactError(`${table.path}: missing column '${name}'`);
  }
  return table.records.map((rec) => rec[idx]!);
}
