#!/usr/bin/env node
// Annotated 2x2 confusion matrix image from the evaluate command's
// confusion.csv (corner cell "true\predicted", one row per true class).
//
// Usage: plot-confusion --input confusion.csv --output out/confusion

import { pathToFileURL } from 'url';
import { ArtifactError, loadCsv } from './csv.js';
import { parseIoFlags, runScript } from './args.js';
import {
  HEIGHT,
  MARGIN,
  PLOT_H,
  PLOT_W,
  WIDTH,
  colormap,
  drawFrame,
  writeFigure,
} from './figure.js';
import { Svg } from './svg.js';

const CORNER = 'true\\predicted';

const USAGE = 'usage: plot-confusion --input confusion.csv --output <stem>';

interface Matrix {
  labels: [string, string];
  /** counts[trueIdx][predictedIdx], ordered as the header orders labels. */
  counts: [[number, number], [number, number]];
}

function readMatrix(path: string): Matrix {
  const table = loadCsv(path);
  const header = table.header;
  if (header[0] !== CORNER) {
    throw new ArtifactError(`${path}: expected corner column '${CORNER}', got '${header[0]}'`);
  }
  if (header.length < 3) {
    const have = header.slice(1).join("', '");
    throw new ArtifactError(`${path}: expected two predicted-label columns, got '${have}'`);
  }
  if (header.length > 3) {
    throw new ArtifactError(`${path}: unexpected column '${header[3]}'`);
  }
  const labels: [string, string] = [header[1]!, header[2]!];
  if (labels[0] === labels[1]) {
    throw new ArtifactError(`${path}: duplicate column '${labels[0]}'`);
  }
  if (table.records.length !== 2) {
    throw new ArtifactError(`${path}: expected 2 data rows, got ${table.records.length}`);
  }
  const byTrue = new Map(table.records.map((rec) => [rec[0]!, rec]));
  for (const label of labels) {
    if (!byTrue.has(label)) {
      throw new ArtifactError(`${path}: missing row for true class '${label}'`);
    }
  }
  const cell = (rec: string[], j: number): number => {
    const raw = rec[j]!;
    const value = Number(raw);
    if (raw === '' || !Number.isInteger(value) || value < 0) {
      throw new ArtifactError(`${path}: count for '${rec[0]}'/'${table.header[j]}' is not a non-negative integer: '${raw}'`);
    }
    return value;
  };
  const rows = labels.map((label) => byTrue.get(label)!);
  return {
    labels,
    counts: [
      [cell(rows[0]!, 1), cell(rows[0]!, 2)],
      [cell(rows[1]!, 1), cell(rows[1]!, 2)],
    ],
  };
}

function renderMatrix(matrix: Matrix, stem: string): string {
  const { labels, counts } = matrix;
  const flat = counts.flat();
  const hi = Math.max(...flat);

  const svg = new Svg(WIDTH, HEIGHT);
  drawFrame(svg, 'confusion matrix', 'predicted', 'true');
  const side = Math.min(PLOT_W, PLOT_H);
  const x0 = MARGIN.left + (PLOT_W - side) / 2;
  const y0 = MARGIN.top + (PLOT_H - side) / 2;
  const cs = side / 2;
  for (let i = 0; i < 2; i++) {
    for (let j = 0; j < 2; j++) {
      const count = counts[i]![j]!;
      const t = hi > 0 ? count / hi : 0;
      const x = x0 + j * cs;
      const y = y0 + i * cs;
      svg.rect(x, y, cs, cs, { fill: colormap(t), stroke: 'white', 'stroke-width': 2 });
      svg.text(x + cs / 2, y + cs / 2 + 6, String(count), {
        'text-anchor': 'middle',
        'font-size': 22,
        fill: t > 0.6 ? 'black' : 'white',
        class: 'cell-count',
      });
    }
  }
  for (const [i, label] of labels.entries()) {
    svg.text(x0 - 10, y0 + i * cs + cs / 2 + 4, label, { 'text-anchor': 'end' });
    svg.text(x0 + i * cs + cs / 2, y0 + side + 18, label, { 'text-anchor': 'middle' });
  }
  const { svg: svgPath } = writeFigure(stem, svg.render());
  return svgPath;
}

export function main(argv: string[]): number {
  return runScript(() => {
    const { input, output } = parseIoFlags(argv, USAGE);
    console.log(renderMatrix(readMatrix(input), output));
  });
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
