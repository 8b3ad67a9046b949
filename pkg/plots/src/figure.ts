import { mkdirSync, writeFileSync } from 'fs';
import { dirname } from 'path';
import { scaleLinear } from 'd3-scale';
import { interpolateViridis } from 'd3-scale-chromatic';
import { Svg, fmt } from './svg.js';
import { renderPng } from './png.js';

// One canvas size for every figure; determinism over configurability.
export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 44, right: 168, bottom: 60, left: 88 };

export const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
export const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

// Fixed series palette (Okabe-Ito); colormaps come from viridis.
export const SERIES_COLORS = ['#0072b2', '#d55e00', '#009e73', '#cc79a7', '#e69f00', '#56b4e9'];

export function colormap(t: number): string {
  return interpolateViridis(Math.max(0, Math.min(1, t)));
}

/** Value label shown inside cells and next to ticks: short but faithful. */
export function cellLabel(value: number): string {
  if (Number.isInteger(value)) return String(value);
  const s = value.toFixed(4);
  return s.replace(/0+$/, '').replace(/\.$/, '');
}

// Pinned locale so rendered text never depends on the host environment.
const COMPACT = new Intl.NumberFormat('en', {
  notation: 'compact',
  maximumSignificantDigits: 3,
});

/** Axis tick label: compact above 10k, three significant digits below. */
export function tickLabel(value: number): string {
  if (Math.abs(value) >= 10_000) return COMPACT.format(value);
  if (Number.isInteger(value)) return String(value);
  const s = value.toPrecision(3);
  return s.includes('e') ? s : s.replace(/0+$/, '').replace(/\.$/, '');
}

export interface Axis {
  scale: (v: number) => number;
  ticks: number[];
}

export function linearAxis(domain: [number, number], range: [number, number], tickCount = 6): Axis {
  const scale = scaleLinear().domain(domain).range(range);
  return { scale: (v) => scale(v), ticks: scale.ticks(tickCount) };
}

export function drawFrame(svg: Svg, title: string, xLabel: string, yLabel: string): void {
  svg.text(MARGIN.left + PLOT_W / 2, 24, title, {
    'text-anchor': 'middle',
    'font-size': 15,
    'font-weight': 'bold',
  });
  svg.text(MARGIN.left + PLOT_W / 2, HEIGHT - 14, xLabel, { 'text-anchor': 'middle' });
  svg.raw(
    `<text x="${fmt(20)}" y="${fmt(MARGIN.top + PLOT_H / 2)}" font-family="DejaVu Sans, Helvetica, Arial, sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 ${fmt(MARGIN.top + PLOT_H / 2)})">${yLabel}</text>`,
  );
}

export function drawXTicks(svg: Svg, axis: Axis, format: (v: number) => string = tickLabel): void {
  const y0 = MARGIN.top + PLOT_H;
  svg.line(MARGIN.left, y0, MARGIN.left + PLOT_W, y0, { stroke: 'black' });
  for (const t of axis.ticks) {
    const x = axis.scale(t);
    svg.line(x, y0, x, y0 + 5, { stroke: 'black' });
    svg.text(x, y0 + 20, format(t), { 'text-anchor': 'middle' });
  }
}

export function drawYTicks(svg: Svg, axis: Axis, format: (v: number) => string = tickLabel): void {
  svg.line(MARGIN.left, MARGIN.top, MARGIN.left, MARGIN.top + PLOT_H, { stroke: 'black' });
  for (const t of axis.ticks) {
    const y = axis.scale(t);
    svg.line(MARGIN.left - 5, y, MARGIN.left, y, { stroke: 'black' });
    svg.text(MARGIN.left - 9, y + 4, format(t), { 'text-anchor': 'end' });
    svg.line(MARGIN.left, y, MARGIN.left + PLOT_W, y, {
      stroke: '#dddddd',
      'stroke-width': 0.5,
    });
  }
}

export function drawLegend(svg: Svg, entries: Array<{ label: string; color: string }>): void {
  const x = MARGIN.left + PLOT_W + 16;
  let y = MARGIN.top + 8;
  for (const { label, color } of entries) {
    svg.rect(x, y - 9, 12, 12, { fill: color });
    svg.text(x + 18, y + 1, label);
    y += 20;
  }
}

/** Vertical viridis bar with min/max labels, for the heatmap figures. */
export function drawColorbar(svg: Svg, lo: number, hi: number): void {
  const x = MARGIN.left + PLOT_W + 24;
  const barH = PLOT_H * 0.7;
  const y0 = MARGIN.top + (PLOT_H - barH) / 2;
  const steps = 32;
  for (let i = 0; i < steps; i++) {
    const t = i / (steps - 1);
    svg.rect(x, y0 + barH - ((i + 1) * barH) / steps, 16, barH / steps + 0.5, {
      fill: colormap(t),
    });
  }
  svg.rect(x, y0, 16, barH, { fill: 'none', stroke: 'black', 'stroke-width': 0.5 });
  svg.text(x + 22, y0 + barH + 4, cellLabel(lo));
  svg.text(x + 22, y0 + 10, cellLabel(hi));
}

/** Write the SVG and its PNG rasterization next to each other. */
export function writeFigure(stem: string, svgMarkup: string): { svg: string; png: string } {
  const svgPath = `${stem}.svg`;
  const pngPath = `${stem}.png`;
  mkdirSync(dirname(svgPath), { recursive: true });
  writeFileSync(svgPath, svgMarkup);
  writeFileSync(pngPath, renderPng(svgMarkup));
  return { svg: svgPath, png: pngPath };
}
