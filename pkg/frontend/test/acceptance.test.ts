import { createHash } from 'node:crypto';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { readMetadata, writeFigure } from '../src/figure.js';

const FIXTURES = join(__dirname, 'fixtures');

// Shipped fixtures come from real solver runs: a forward-backward run with
// the geometric envelope and a second-order run with the superlinear one.
const CASES = [
  { stem: 'pg_quadratic', envelope: 'pg_value_gap' },
  { stem: 'tensor_quartic', envelope: 'value_gap_superlinear' },
];

describe('a9: rendered figures embed a passing below-envelope assertion', () => {
  for (const { stem, envelope } of CASES) {
    it(`${stem} trace renders under its ${envelope} envelope`, () => {
      const scratch = mkdtempSync(join(tmpdir(), 'figures-a9-'));
      const trace = join(FIXTURES, `${stem}_trace.csv`);
      const report = join(FIXTURES, `${stem}_report.json`);
      const out = join(scratch, `${stem}.svg`);

      const built = writeFigure({ traces: [trace], report, out });
      expect(built.checks).toEqual([
        { name: envelope, rows: expect.any(Number), ok: true },
      ]);

      const svg = readFileSync(out, 'utf8');
      const meta = readMetadata(svg) as {
        inputs: Record<string, string>;
        below_envelope: Record<string, boolean>;
      };
      expect(meta.below_envelope[envelope]).toBe(true);
      for (const [name, digest] of Object.entries(meta.inputs)) {
        const recomputed =
          'sha256:' + createHash('sha256').update(readFileSync(join(FIXTURES, name))).digest('hex');
        expect(digest).toBe(recomputed);
      }
      expect(svg).toContain(`${envelope} bound`);
    });
  }
});
