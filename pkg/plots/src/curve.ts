#!/usr/bin/env node
// Line plots over the two curve artifacts: accuracy and f1 against either
// reference size (ref_length.csv) or target prefix length (target_prefix.csv).
// Every data row gets a marker per series, so point counts are visible.
//
// Usage: plot-curve --input ref_length.csv --output out/ref_length

import { pathToFileURL } from 'url';
import { ArtifactError, loadCsv, numericColumn, requireColumns, Table } from './csv.js';
import { parseIoFlags, runScript } from './args.js';
import {
  MARGIN,
  PLOT_H,
  PLOT_W,
  HEIGHT,
  WIDTH,
  SERIES_COLORS,
  drawFrame,
  drawLegend,
  drawXTicks,
  drawYTicks,
  linearAxis,
  writeFigure,
} from './figure.js';
import { Svg } from './svg.js';

export const REF_LENGTH_COLUMNS = ['ref_chars', 'accuracy', 'f1', 'n_scored'] as const;
export const TARGET_PREFIX_COLUMNS = ['prefix_chars', 'accuracy', 'f1', 'n_scored'] as const;

const USAGE = 'usage: plot-curve --input <ref_length.csv | target_prefix.csv> --output <stem>';

interface CurveKind {
  xColumn: string;
  xLabel: string;
  title: string;
  columns: readonly string[];
}

const KINDS: CurveKind[] = [
  {
    xColumn: 'ref_chars',
    xLabel: 'reference chars per class',
    title: 'score vs reference size',
    columns: REF_LENGTH_COLUMNS,
  },
  {
    xColumn: 'prefix_chars',
    xLabel: 'target prefix chars',
    title: 'score vs target prefix',
    columns: TARGET_PREFIX_COLUMNS,
  },
];

function detectKind(table: Table): CurveKind {
  const kind = KINDS.find((c) => table.header.includes(c.xColumn));
  if (!kind) {
    throw new ArtifactError(
      `${table.path}: missing column 'ref_chars' or 'prefix_chars' (not a curve artifact)`,
    );
  }
  requireColumns(table, kind.columns);
  return kind;
}

function renderCurve(table: Table, kind: CurveKind, stem: string): string {
  const xs = numericColumn(table, kind.xColumn);
  const series = [
    { name: 'accuracy', values: numericColumn(table, 'accuracy') },
    { name: 'f1', values: numericColumn(table, 'f1') },
  ];
  if (xs.length === 0) {
    throw new ArtifactError(`${table.path}: no data rows`);
  }

  const allY = series.flatMap((s) => s.values);
  const yLo = Math.min(...allY);
  const yHi = Math.max(...allY);
  const pad = yHi > yLo ? (yHi - yLo) * 0.08 : 0.05;
  const xAxis = linearAxis([Math.min(...xs), Math.max(...xs)], [MARGIN.left, MARGIN.left + PLOT_W]);
  const yAxis = linearAxis([yLo - pad, yHi + pad], [MARGIN.top + PLOT_H, MARGIN.top]);

  const svg = new Svg(WIDTH, HEIGHT);
  drawFrame(svg, kind.title, kind.xLabel, 'score');
  drawYTicks(svg, yAxis);
  drawXTicks(svg, xAxis);
  for (const [i, s] of series.entries()) {
    const color = SERIES_COLORS[i]!;
    const pts = xs.map((x, j) => [xAxis.scale(x), yAxis.scale(s.values[j]!)] as [number, number]);
    svg.polyline(pts, { stroke: color, 'stroke-width': 1.5 });
    for (const [px, py] of pts) {
      svg.circle(px, py, 3, { fill: color, class: `marker ${s.name}` });
    }
  }
  drawLegend(
    svg,
    series.map((s, i) => ({ label: s.name, color: SERIES_COLORS[i]! })),
  );
  const { svg: svgPath } = writeFigure(stem, svg.render());
  return svgPath;
}

export function main(argv: string[]): number {
  return runScript(() => {
    const { input, output } = parseIoFlags(argv, USAGE);
    const table = loadCsv(input);
    const kind = detectKind(table);
    console.log(renderCurve(table, kind, output));
  });
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
