#!/usr/bin/env node
// Timing views over grid_search.csv: each timing column against k, one line
// per alpha. Pure re-plots of the recorded measurements.
//
// Usage: plot-timing --input grid_search.csv --output out/timing

import { pathToFileURL } from 'url';
import { loadCsv, numericColumn, requireColumns } from './csv.js';
import { parseIoFlags, runScript } from './args.js';
import {
  MARGIN,
  PLOT_H,
  PLOT_W,
  HEIGHT,
  WIDTH,
  SERIES_COLORS,
  cellLabel,
  drawFrame,
  drawLegend,
  drawXTicks,
  drawYTicks,
  linearAxis,
  writeFigure,
} from './figure.js';
import { Svg } from './svg.js';
import { GRID_COLUMNS } from './heatmap.js';

const TIMING_COLUMNS = ['train_seconds', 'eval_seconds', 'eval_chars_per_second'] as const;

const USAGE = 'usage: plot-timing --input grid_search.csv --output <stem>';

function renderTiming(
  ks: number[],
  alphas: number[],
  rows: Array<{ k: number; alpha: number; value: number }>,
  column: string,
  stem: string,
): string {
  const xAxis = linearAxis(
    [Math.min(...ks), Math.max(...ks)],
    [MARGIN.left, MARGIN.left + PLOT_W],
  );
  // k is a model order; tick the observed values, not fractional steps.
  if (ks.length <= 10) xAxis.ticks = ks;
  const values = rows.map((r) => r.value);
  const yLo = Math.min(...values);
  const yHi = Math.max(...values);
  const pad = yHi > yLo ? (yHi - yLo) * 0.08 : Math.abs(yHi) * 0.08 + 1e-9;
  const yAxis = linearAxis([yLo - pad, yHi + pad], [MARGIN.top + PLOT_H, MARGIN.top]);

  const svg = new Svg(WIDTH, HEIGHT);
  drawFrame(svg, column.replace(/_/g, ' '), 'k', column.replace(/_/g, ' '));
  drawYTicks(svg, yAxis);
  drawXTicks(svg, xAxis);
  for (const [i, alpha] of alphas.entries()) {
    const color = SERIES_COLORS[i % SERIES_COLORS.length]!;
    const line = rows
      .filter((r) => r.alpha === alpha)
      .sort((a, b) => a.k - b.k)
      .map((r) => [xAxis.scale(r.k), yAxis.scale(r.value)] as [number, number]);
    svg.polyline(line, { stroke: color, 'stroke-width': 1.5 });
    for (const [px, py] of line) {
      svg.circle(px, py, 3, { fill: color, class: 'marker' });
    }
  }
  drawLegend(
    svg,
    alphas.map((alpha, i) => ({
      label: `alpha=${cellLabel(alpha)}`,
      color: SERIES_COLORS[i % SERIES_COLORS.length]!,
    })),
  );
  const { svg: svgPath } = writeFigure(`${stem}_${column}`, svg.render());
  return svgPath;
}

export function main(argv: string[]): number {
  return runScript(() => {
    const { input, output } = parseIoFlags(argv, USAGE);
    const table = loadCsv(input);
    requireColumns(table, GRID_COLUMNS);
    const ks = numericColumn(table, 'k');
    const alphas = numericColumn(table, 'alpha');
    const uniq = (xs: number[]) => [...new Set(xs)].sort((a, b) => a - b);
    for (const column of TIMING_COLUMNS) {
      const values = numericColumn(table, column);
      const rows = values.map((value, i) => ({ k: ks[i]!, alpha: alphas[i]!, value }));
      console.log(renderTiming(uniq(ks), uniq(alphas), rows, column, output));
    }
  });
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
