#!/usr/bin/env node
// Grid-search heatmaps: one figure per score metric, cells k x alpha.
//
// Usage: plot-heatmap --input grid_search.csv --output out/grid
// Writes out/grid_f1.svg/.png and out/grid_accuracy.svg/.png.

import { pathToFileURL } from 'url';
import { ArtifactError, loadCsv, numericColumn, requireColumns } from './csv.js';
import { parseIoFlags, runScript } from './args.js';
import {
  HEIGHT,
  MARGIN,
  PLOT_H,
  PLOT_W,
  WIDTH,
  cellLabel,
  colormap,
  drawColorbar,
  drawFrame,
  writeFigure,
} from './figure.js';
import { Svg } from './svg.js';

export const GRID_COLUMNS = [
  'k',
  'alpha',
  'f1',
  'accuracy',
  'train_seconds',
  'eval_seconds',
  'eval_chars_per_second',
] as const;

const SCORE_METRICS = ['f1', 'accuracy'] as const;

const USAGE = 'usage: plot-heatmap --input grid_search.csv --output <stem>';

interface Grid {
  ks: number[];
  alphas: number[];
  /** cells[metric] maps "k,alpha" to the value read from the file. */
  cells: Map<string, Map<string, number>>;
}

function buildGrid(path: string): Grid {
  const table = loadCsv(path);
  requireColumns(table, GRID_COLUMNS);
  const ks = numericColumn(table, 'k');
  const alphas = numericColumn(table, 'alpha');
  const cells = new Map<string, Map<string, number>>();
  for (const metric of SCORE_METRICS) {
    const values = numericColumn(table, metric);
    const byCell = new Map<string, number>();
    for (let i = 0; i < values.length; i++) {
      const key = `${ks[i]},${alphas[i]}`;
      if (byCell.has(key)) {
        throw new ArtifactError(`${path}: duplicate grid cell k=${ks[i]} alpha=${alphas[i]}`);
      }
      byCell.set(key, values[i]!);
    }
    cells.set(metric, byCell);
  }
  const uniq = (xs: number[]) => [...new Set(xs)].sort((a, b) => a - b);
  const grid: Grid = { ks: uniq(ks), alphas: uniq(alphas), cells };
  const expected = grid.ks.length * grid.alphas.length;
  if (cells.get('f1')!.size !== expected) {
    throw new ArtifactError(
      `${path}: grid is ragged: ${cells.get('f1')!.size} cells for ` +
        `${grid.ks.length} k values x ${grid.alphas.length} alpha values`,
    );
  }
  return grid;
}

function renderHeatmap(grid: Grid, metric: string, stem: string): string {
  const byCell = grid.cells.get(metric)!;
  const values = [...byCell.values()];
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo;

  const svg = new Svg(WIDTH, HEIGHT);
  drawFrame(svg, `grid search: ${metric}`, 'alpha', 'k');
  const cw = PLOT_W / grid.alphas.length;
  const ch = PLOT_H / grid.ks.length;
  // Low k at the bottom, matching the usual orientation of a parameter sweep.
  for (const [row, k] of grid.ks.entries()) {
    for (const [col, alpha] of grid.alphas.entries()) {
      const value = byCell.get(`${k},${alpha}`)!;
      const t = span > 0 ? (value - lo) / span : 1;
      const x = MARGIN.left + col * cw;
      const y = MARGIN.top + (grid.ks.length - 1 - row) * ch;
      svg.rect(x, y, cw, ch, { fill: colormap(t), stroke: 'white', 'stroke-width': 1 });
      svg.text(x + cw / 2, y + ch / 2 + 4, cellLabel(value), {
        'text-anchor': 'middle',
        fill: t > 0.6 ? 'black' : 'white',
        class: 'cell-value',
      });
    }
  }
  for (const [row, k] of grid.ks.entries()) {
    const y = MARGIN.top + (grid.ks.length - 1 - row) * ch + ch / 2 + 4;
    svg.text(MARGIN.left - 9, y, cellLabel(k), { 'text-anchor': 'end' });
  }
  for (const [col, alpha] of grid.alphas.entries()) {
    const x = MARGIN.left + col * cw + cw / 2;
    svg.text(x, MARGIN.top + PLOT_H + 20, cellLabel(alpha), { 'text-anchor': 'middle' });
  }
  drawColorbar(svg, lo, hi);
  const { svg: svgPath } = writeFigure(`${stem}_${metric}`, svg.render());
  return svgPath;
}

export function main(argv: string[]): number {
  return runScript(() => {
    const { input, output } = parseIoFlags(argv, USAGE);
    const grid = buildGrid(input);
    for (const metric of SCORE_METRICS) {
      const path = renderHeatmap(grid, metric, output);
      console.log(path);
    }
  });
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
