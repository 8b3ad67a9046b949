// Deterministic SVG assembly: fixed canvas, fixed precision, no timestamps.

export const FONT = 'DejaVu Sans, Helvetica, Arial, sans-serif';

export function fmt(x: number): string {
  // Fixed precision, trailing zeros trimmed, so reruns are byte-identical.
  const s = x.toFixed(2);
  return s.includes('.') ? s.replace(/\.?0+$/, '') : s;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

type Attrs = Record<string, string | number>;

function attrString(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${typeof v === 'number' ? fmt(v) : esc(v)}"`)
    .join('');
}

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(x: number, y: number, w: number, h: number, attrs: Attrs = {}): void {
    this.parts.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}"${attrString(attrs)}/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs = {}): void {
    this.parts.push(`<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}"${attrString(attrs)}/>`);
  }

  circle(cx: number, cy: number, r: number, attrs: Attrs = {}): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}"${attrString(attrs)}/>`);
  }

  polyline(points: Array<[number, number]>, attrs: Attrs = {}): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    this.parts.push(`<polyline points="${pts}" fill="none"${attrString(attrs)}/>`);
  }

  text(x: number, y: number, content: string, attrs: Attrs = {}): void {
    const base: Attrs = { 'font-family': FONT, 'font-size': 12, ...attrs };
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}"${attrString(base)}>${esc(content)}</text>`);
  }

  raw(markup: string): void {
    this.parts.push(markup);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      '</svg>',
      '',
    ].join('\n');
  }
}
