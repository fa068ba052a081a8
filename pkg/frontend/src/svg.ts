/** Small hand-rolled SVG plotting: enough for lines, steps, points, axes. */

export interface Extent {
  min: number;
  max: number;
}

export function extentOf(values: number[], padFraction = 0.0): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!isFinite(min)) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = (max - min) * padFraction;
  return { min: min - pad, max: max + pad };
}

export class LinearScale {
  constructor(
    private domain: Extent,
    private range: [number, number],
  ) {}

  apply(v: number): number {
    const { min, max } = this.domain;
    const [a, b] = this.range;
    return a + ((v - min) / (max - min)) * (b - a);
  }

  ticks(n = 5): number[] {
    const { min, max } = this.domain;
    const step = (max - min) / n;
    const out: number[] = [];
    for (let i = 0; i <= n; i++) out.push(min + i * step);
    return out;
  }
}

export const SERIES_COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd'];

export interface PanelSpec {
  x: number;
  y: number;
  width: number;
  height: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: LinearScale;
  yScale: LinearScale;
}

const esc = (s: string) => s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  text(x: number, y: number, content: string, opts = ''): void {
    this.parts.push(`<text x="${x.toFixed(1)}" y="${y.toFixed(1)}" font-family="sans-serif" font-size="11" ${opts}>${esc(content)}</text>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = '#333', extra = ''): void {
    this.parts.push(
      `<line x1="${x1.toFixed(1)}" y1="${y1.toFixed(1)}" x2="${x2.toFixed(1)}" y2="${y2.toFixed(1)}" stroke="${stroke}" stroke-width="1" ${extra}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string): void {
    const coords = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(' ');
    this.parts.push(`<polyline points="${coords}" fill="none" stroke="${stroke}" stroke-width="1.5"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" fill="${fill}" fill-opacity="0.6"/>`);
  }

  panel(spec: PanelSpec): void {
    const { x, y, width, height, xScale, yScale } = spec;
    this.line(x, y + height, x + width, y + height);
    this.line(x, y, x, y + height);
    for (const t of xScale.ticks()) {
      const px = xScale.apply(t);
      this.line(px, y + height, px, y + height + 4);
      this.text(px - 8, y + height + 16, trimTick(t));
    }
    for (const t of yScale.ticks()) {
      const py = yScale.apply(t);
      this.line(x - 4, py, x, py);
      this.text(x - 34, py + 3, trimTick(t));
    }
    this.text(x + width / 2 - 30, y + height + 30, spec.xLabel);
    this.text(x - 34, y - 8, spec.yLabel);
    this.text(x + 4, y + 4, spec.title, 'font-weight="bold"');
  }

  legend(x: number, y: number, entries: Array<[string, string]>): void {
    entries.forEach(([name, color], i) => {
      const ly = y + i * 14;
      this.line(x, ly, x + 16, ly, color, 'stroke-width="2"');
      this.text(x + 20, ly + 3, name);
    });
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join('\n') +
      '\n</svg>\n'
    );
  }
}

function trimTick(v: number): string {
  const rounded = Math.abs(v) >= 100 ? v.toFixed(0) : Math.abs(v) >= 1 ? v.toFixed(1) : v.toFixed(2);
  return rounded.replace(/\.0+$/, '');
}
