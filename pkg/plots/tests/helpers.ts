import { mkdtempSync, readFileSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import { dirname, join } from 'path';
import { fileURLToPath } from 'url';
import { vi } from 'vitest';

export const SAMPLES = join(dirname(fileURLToPath(import.meta.url)), '..', 'samples');

export function tmpStem(name: string): string {
  return join(mkdtempSync(join(tmpdir(), 'plots-')), name);
}

export function read(path: string): string {
  return readFileSync(path, 'utf8');
}

/** Run a script main() with stderr captured; console noise silenced. */
export function runMain(
  main: (argv: string[]) => number,
  argv: string[],
): { code: number; stderr: string } {
  let stderr = '';
  const errSpy = vi
    .spyOn(process.stderr, 'write')
    .mockImplementation(((chunk: unknown) => {
      stderr += String(chunk);
      return true;
    }) as typeof process.stderr.write);
  const logSpy = vi.spyOn(console, 'log').mockImplementation(() => {});
  try {
    const code = main(argv);
    return { code, stderr };
  } finally {
    errSpy.mockRestore();
    logSpy.mockRestore();
  }
}

/** Copy a sample CSV with one named column dropped from header and rows. */
export function withoutColumn(srcPath: string, column: string, destDir: string): string {
  const lines = read(srcPath).trim().split(/\r?\n/);
  const header = lines[0]!.split(',');
  const idx = header.indexOf(column);
  if (idx < 0) throw new Error(`test setup: no column ${column} in ${srcPath}`);
  const out = lines.map((line) => {
    const cells = line.split(',');
    cells.splice(idx, 1);
    return cells.join(',');
  });
  const dest = join(destDir, 'mutated.csv');
  writeFileSync(dest, out.join('\n') + '\n');
  return dest;
}

/** Copy a sample CSV with one constant extra column appended. */
export function withExtraColumn(srcPath: string, column: string, destDir: string): string {
  const lines = read(srcPath).trim().split(/\r?\n/);
  const out = lines.map((line, i) => (i === 0 ? `${line},${column}` : `${line},0`));
  const dest = join(destDir, 'mutated.csv');
  writeFileSync(dest, out.join('\n') + '\n');
  return dest;
}

export function countMatches(haystack: string, needle: string | RegExp): number {
  const re = typeof needle === 'string' ? new RegExp(escapeRegExp(needle), 'g') : new RegExp(needle.source, 'g');
  return (haystack.match(re) ?? []).length;
}

function escapeRegExp(s: string): string {
  return s.replace(/[.*+?^${}()|[\]\\]/g, '\\$&');
}
