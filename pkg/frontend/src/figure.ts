import { createHash } from 'node:crypto';
import { readFileSync, writeFileSync } from 'node:fs';
import { basename } from 'node:path';

import { InputError, Series, compareSeries, parseCsv, traceSeries } from './csv.js';
import {
  EnvelopeCheck,
  assertBelowEnvelope,
  envelopeSeries,
  parseReport,
  pickEnvelopes,
} from './report.js';
import { Scale, Styled, envelopeColor, readMetadata, renderSvg, seriesColor } from './svg.js';

export interface FigureSpec {
  /** Trace CSVs or a single comparison CSV. */
  traces: string[];
  /** Certificate report; required for an envelope overlay. */
  report?: string;
  out: string;
  /** Bound-report names to overlay; empty picks the algorithm default. */
  envelopes?: string[];
  xScale?: Scale;
  yScale?: Scale;
}

export interface BuiltFigure {
  svg: string;
  checks: EnvelopeCheck[];
}

function sha256(buffer: Buffer): string {
  return 'sha256:' + createHash('sha256').update(buffer).digest('hex');
}

function stem(path: string): string {
  return basename(path).replace(/\.[^.]+$/, '');
}

function isCompareFile(text: string, path: string): boolean {
  const header = parseCsv(text, path).columns;
  return header.some((c) => c.startsWith('value_gap_'));
}

export function buildFigure(spec: FigureSpec): BuiltFigure {
  if (!spec.traces || spec.traces.length === 0) {
    throw new InputError('no trace file given');
  }
  if (!spec.out) {
    throw new InputError('no output path given');
  }
  const xScale: Scale = spec.xScale ?? 'linear';
  const yScale: Scale = spec.yScale ?? 'log';

  const inputs: Record<string, string> = {};
  const observed: Series[] = [];
  for (const path of spec.traces) {
    const buffer = readFileSync(path);
    inputs[basename(path)] = sha256(buffer);
    const text = buffer.toString('utf8');
    if (isCompareFile(text, path)) {
      observed.push(...compareSeries(text, path));
    } else {
      observed.push(traceSeries(text, path, stem(path)));
    }
  }

  const checks: EnvelopeCheck[] = [];
  const envelopes: Series[] = [];
  if (spec.report) {
    const buffer = readFileSync(spec.report);
    inputs[basename(spec.report)] = sha256(buffer);
    const report = parseReport(buffer.toString('utf8'), spec.report);
    // crosscheck against the plotted gaps only when they are that run's
    const single = spec.traces.length === 1 && observed.length === 1 ? observed[0]! : null;
    for (const rep of pickEnvelopes(report, spec.envelopes ?? [], spec.report)) {
      checks.push(assertBelowEnvelope(rep, single, spec.report));
      envelopes.push(envelopeSeries(rep));
    }
  } else if (spec.envelopes && spec.envelopes.length > 0) {
    throw new InputError('envelope overlay requested but no report given');
  }

  const styled: Styled[] = [
    ...observed.map((s, i) => ({ ...s, color: seriesColor(i), dashed: false })),
    ...envelopes.map((s) => ({ ...s, color: envelopeColor(), dashed: true })),
  ];
  const belowEnvelope: Record<string, boolean> = {};
  for (const check of checks) {
    belowEnvelope[check.name] = check.ok;
  }
  const svg = renderSvg({
    series: styled,
    xScale,
    yScale,
    title: observed.map((s) => s.label).join(' vs '),
    xLabel: 'k',
    yLabel: 'value gap',
    metadata: {
      generator: 'proxfigures',
      inputs,
      below_envelope: belowEnvelope,
    },
  });
  return { svg, checks };
}

export function writeFigure(spec: FigureSpec): BuiltFigure {
  const built = buildFigure(spec);
  writeFileSync(spec.out, built.svg);
  return built;
}

export { readMetadata };
