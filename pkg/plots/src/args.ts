import { parseArgs } from 'util';
import { ArtifactError } from './csv.js';

export class UsageError extends Error {}

export interface IoFlags {
  input: string;
  output: string;
}

/**
 * The flag contract every figure script shares: --input <artifact> and
 * --output <stem>. The stem gets per-figure suffixes and .svg/.png
 * extensions appended by the script.
 */
export function parseIoFlags(argv: string[], usage: string): IoFlags {
  let values: { input?: string; output?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        input: { type: 'string' },
        output: { type: 'string' },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    throw new UsageError(`${(err as Error).message}\n${usage}`);
  }
  if (!values.input) throw new UsageError(`--input is required\n${usage}`);
  if (!values.output) throw new UsageError(`--output is required\n${usage}`);
  return { input: values.input, output: values.output };
}

/** Shared error-to-exit-code plumbing so every script reports the same way. */
export function runScript(body: () => void): number {
  try {
    body();
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`usage error: ${err.message}\n`);
      return 2;
    }
    if (err instanceof ArtifactError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
  return 0;
}
