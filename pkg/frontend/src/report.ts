import { InputError, Series } from './csv.js';

/** [k, bound, observed, margin, ok] as serialized by the solver. */
export type PerKRow = [number, number | null, number | null, number | null, boolean];

export interface BoundReport {
  name: string;
  satisfied: boolean;
  skipped: boolean;
  note: string;
  worst_margin: number | null;
  per_k: PerKRow[];
}

export interface Report {
  ok: boolean;
  metadata: {
    algorithm: string;
    problem: string;
    mu: number;
    sigma: number | null;
    d0: number;
    h_star: number | null;
    iterations: number;
    termination: string;
    trace_file: string;
  };
  params: Record<string, unknown>;
  config: Record<string, unknown>;
  reports: BoundReport[];
}

export function parseReport(text: string, path: string): Report {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new InputError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const rep = raw as Report;
  if (!rep || typeof rep !== 'object' || !Array.isArray(rep.reports) || !rep.metadata) {
    throw new InputError(`${path}: missing reports/metadata sections`);
  }
  return rep;
}

// The value-gap envelope serialized for each driver family.  Linear-rate
// methods carry a geometric bound, window-driven methods a superlinear one.
const DEFAULT_ENVELOPE: Record<string, string[]> = {
  ahpe: ['value_gap_linear', 'value_gap_vs_A'],
  proxgrad: ['pg_value_gap'],
  largestep: ['value_gap_superlinear'],
  tensor: ['value_gap_superlinear'],
};

export function pickEnvelopes(report: Report, requested: string[], path: string): BoundReport[] {
  const byName = new Map(report.reports.map((r) => [r.name, r]));
  if (requested.length > 0) {
    return requested.map((name) => {
      const rep = byName.get(name);
      if (!rep) {
        throw new InputError(
          `${path}: no bound report named ${JSON.stringify(name)}; available: ` +
            report.reports.map((r) => r.name).join(', '),
        );
      }
      if (rep.skipped) {
        throw new InputError(`${path}: bound report ${name} was skipped (${rep.note})`);
      }
      return rep;
    });
  }
  const algorithm = report.metadata.algorithm;
  const candidates = DEFAULT_ENVELOPE[algorithm];
  if (!candidates) {
    throw new InputError(`${path}: no default envelope for algorithm ${JSON.stringify(algorithm)}`);
  }
  for (const name of candidates) {
    const rep = byName.get(name);
    if (rep && !rep.skipped) return [rep];
  }
  throw new InputError(`${path}: none of [${candidates.join(', ')}] present and unskipped`);
}

/** The envelope curve is the serialized bound column, nothing recomputed. */
export function envelopeSeries(rep: BoundReport): Series {
  const points: [number, number][] = [];
  for (const [k, bound] of rep.per_k) {
    if (bound !== null) points.push([k, bound]);
  }
  return { label: `${rep.name} bound`, points };
}

export interface EnvelopeCheck {
  name: string;
  rows: number;
  ok: boolean;
}

/**
 * The below-envelope assertion: every serialized per-k row must hold, and
 * when the plotted trace covers the same iterations its recorded value gap
 * must sit under the serialized bound.  Runs before any rendering.
 */
export function assertBelowEnvelope(
  rep: BoundReport,
  trace: Series | null,
  path: string,
): EnvelopeCheck {
  if (!rep.satisfied) {
    throw new InputError(`${path}: bound report ${rep.name} is marked unsatisfied`);
  }
  const bounds = new Map<number, number>();
  for (const row of rep.per_k) {
    const [k, bound, , , ok] = row;
    if (!ok) {
      throw new InputError(`${path}: ${rep.name} per-k row at k=${k} is marked failing`);
    }
    if (bound !== null) bounds.set(k, bound);
  }
  if (trace) {
    for (const [k, gap] of trace.points) {
      const bound = bounds.get(k);
      if (bound === undefined) continue;
      if (gap > bound * (1 + 1e-12) + 1e-300) {
        throw new InputError(
          `${path}: trace value gap ${gap} exceeds ${rep.name} bound ${bound} at k=${k}`,
        );
      }
    }
  }
  return { name: rep.name, rows: rep.per_k.length, ok: true };
}
