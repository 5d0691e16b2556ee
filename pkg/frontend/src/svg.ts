import { Series } from './csv.js';

export type Scale = 'linear' | 'log';

export interface Styled extends Series {
  color: string;
  dashed: boolean;
}

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { left: 74, right: 22, top: 34, bottom: 52 };

const PALETTE = ['#1f6feb', '#d29922', '#3fb950', '#db61a2', '#8957e5', '#56d4dd'];
const ENVELOPE_COLOR = '#f85149';

export function seriesColor(i: number): string {
  return PALETTE[i % PALETTE.length]!;
}

export function envelopeColor(): string {
  return ENVELOPE_COLOR;
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

interface Axis {
  toPx(v: number): number;
  ticks: number[];
  format(v: number): string;
}

function linearAxis(lo: number, hi: number, pxLo: number, pxHi: number): Axis {
  if (hi === lo) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const rawStep = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= 7) ?? 10 * mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push(t);
  }
  return {
    toPx: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks,
    format: (v) => (Math.abs(v) >= 1e5 ? v.toExponential(0) : String(Math.round(v * 1e6) / 1e6)),
  };
}

function logAxis(lo: number, hi: number, pxLo: number, pxHi: number): Axis {
  const eLo = Math.floor(Math.log10(lo));
  const eHi = Math.ceil(Math.log10(hi));
  const span = Math.max(eHi - eLo, 1);
  const every = Math.max(1, Math.ceil(span / 8));
  const ticks: number[] = [];
  for (let e = eLo; e <= eHi; e += every) {
    ticks.push(Math.pow(10, e));
  }
  return {
    toPx: (v) => pxLo + ((Math.log10(v) - eLo) / (eHi - eLo || 1)) * (pxHi - pxLo),
    ticks,
    format: (v) => `1e${Math.round(Math.log10(v))}`,
  };
}

function pathFor(points: [number, number][], x: Axis, y: Axis, yScale: Scale): string {
  const parts: string[] = [];
  let pen = false;
  for (const [k, v] of points) {
    if (yScale === 'log' && v <= 0) {
      pen = false; // semilog plots drop nonpositive values
      continue;
    }
    const cmd = pen ? 'L' : 'M';
    parts.push(`${cmd}${x.toPx(k).toFixed(2)} ${y.toPx(v).toFixed(2)}`);
    pen = true;
  }
  return parts.join(' ');
}

export interface FigureContent {
  series: Styled[];
  xScale: Scale;
  yScale: Scale;
  title: string;
  xLabel: string;
  yLabel: string;
  /** Serialized verbatim into a <metadata> element. */
  metadata: Record<string, unknown>;
}

export function renderSvg(content: FigureContent): string {
  const { series, xScale, yScale } = content;
  const all = series.flatMap((s) => s.points);
  const xs = all.map(([k]) => k);
  const positives = all.map(([, v]) => v).filter((v) => v > 0);
  const ys = yScale === 'log' ? positives : all.map(([, v]) => v);
  if (ys.length === 0) {
    throw new Error('nothing to plot: no positive values on a log axis');
  }
  const xAxis =
    xScale === 'log'
      ? logAxis(Math.max(Math.min(...xs), 1e-300), Math.max(...xs), MARGIN.left, WIDTH - MARGIN.right)
      : linearAxis(Math.min(...xs), Math.max(...xs), MARGIN.left, WIDTH - MARGIN.right);
  const yAxis =
    yScale === 'log'
      ? logAxis(Math.max(Math.min(...ys), 1e-300), Math.max(...ys), HEIGHT - MARGIN.bottom, MARGIN.top)
      : linearAxis(Math.min(...ys), Math.max(...ys), HEIGHT - MARGIN.bottom, MARGIN.top);

  const grid: string[] = [];
  for (const t of yAxis.ticks) {
    const py = yAxis.toPx(t).toFixed(2);
    grid.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" stroke="#d0d7de" stroke-width="0.5"/>`,
      `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="11">${yAxis.format(t)}</text>`,
    );
  }
  for (const t of xAxis.ticks) {
    const px = xAxis.toPx(t).toFixed(2);
    grid.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${HEIGHT - MARGIN.bottom}" stroke="#d0d7de" stroke-width="0.5"/>`,
      `<text x="${px}" y="${HEIGHT - MARGIN.bottom + 16}" text-anchor="middle" font-size="11">${xAxis.format(t)}</text>`,
    );
  }

  const paths = series.map((s) => {
    const d = pathFor(s.points, xAxis, yAxis, yScale);
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : '';
    return `<path d="${d}" fill="none" stroke="${s.color}" stroke-width="1.6"${dash}/>`;
  });

  const legend = series.map((s, i) => {
    const ly = MARGIN.top + 8 + i * 18;
    const lx = WIDTH - MARGIN.right - 210;
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : '';
    return (
      `<line x1="${lx}" y1="${ly}" x2="${lx + 24}" y2="${ly}" stroke="${s.color}" stroke-width="2"${dash}/>` +
      `<text x="${lx + 30}" y="${ly}" dominant-baseline="middle" font-size="11">${esc(s.label)}</text>`
    );
  });

  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
    `<metadata id="figure-meta">${esc(JSON.stringify(content.metadata))}</metadata>`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="14">${esc(content.title)}</text>`,
    ...grid,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${HEIGHT - MARGIN.bottom}" stroke="#24292f"/>`,
    `<line x1="${MARGIN.left}" y1="${HEIGHT - MARGIN.bottom}" x2="${WIDTH - MARGIN.right}" y2="${HEIGHT - MARGIN.bottom}" stroke="#24292f"/>`,
    `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="12">${esc(content.xLabel)}</text>`,
    `<text x="18" y="${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 ${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2})">${esc(content.yLabel)}</text>`,
    ...paths,
    ...legend,
    `</svg>`,
    ``,
  ].join('\n');
}

/** Pull the JSON blob back out of a rendered figure (used by tests). */
export function readMetadata(svg: string): Record<string, unknown> {
  const match = svg.match(/<metadata id="figure-meta">([\s\S]*?)<\/metadata>/);
  if (!match) {
    throw new Error('figure has no metadata element');
  }
  const text = match[1]!.replace(/&lt;/g, '<').replace(/&gt;/g, '>').replace(/&amp;/g, '&');
  return JSON.parse(text) as Record<string, unknown>;
}
