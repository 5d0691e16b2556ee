#!/usr/bin/env node
import { readFileSync } from 'node:fs';

import { InputError } from './csv.js';
import { FigureSpec, writeFigure } from './figure.js';

const USAGE = `usage: figures <spec.json>
       figures --trace <csv> [--trace <csv> ...] --out <svg>
               [--report <json>] [--envelope <name> ...]
               [--x-scale linear|log] [--y-scale linear|log]

The spec file carries the same fields as the flags:
{"traces": [...], "report": ..., "out": ..., "envelopes": [...],
 "xScale": ..., "yScale": ...}`;

function checkScale(value: string, flag: string): 'linear' | 'log' {
  if (value !== 'linear' && value !== 'log') {
    throw new InputError(`${flag} must be linear or log, got ${JSON.stringify(value)}`);
  }
  return value;
}

export function parseArgs(argv: string[]): FigureSpec {
  if (argv.length === 1 && !argv[0]!.startsWith('--')) {
    const path = argv[0]!;
    const spec = JSON.parse(readFileSync(path, 'utf8')) as FigureSpec;
    if (!Array.isArray(spec.traces) || typeof spec.out !== 'string') {
      throw new InputError(`${path}: spec needs "traces" (array) and "out" (string)`);
    }
    if (spec.xScale) checkScale(spec.xScale, 'xScale');
    if (spec.yScale) checkScale(spec.yScale, 'yScale');
    return spec;
  }

  const spec: FigureSpec = { traces: [], out: '', envelopes: [] };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i]!;
    const value = argv[i + 1];
    const need = () => {
      if (value === undefined || value.startsWith('--')) {
        throw new InputError(`${flag} needs a value`);
      }
      i++;
      return value;
    };
    switch (flag) {
      case '--trace':
        spec.traces.push(need());
        break;
      case '--report':
        spec.report = need();
        break;
      case '--out':
        spec.out = need();
        break;
      case '--envelope':
        spec.envelopes!.push(need());
        break;
      case '--x-scale':
        spec.xScale = checkScale(need(), flag);
        break;
      case '--y-scale':
        spec.yScale = checkScale(need(), flag);
        break;
      case '--help':
      case '-h':
        throw new InputError(USAGE);
      default:
        throw new InputError(`unknown argument ${JSON.stringify(flag)}\n${USAGE}`);
    }
  }
  return spec;
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const built = writeFigure(spec);
    const names = built.checks.map((c) => `${c.name} (${c.rows} rows)`).join(', ');
    console.log(`wrote ${spec.out}` + (names ? `; below envelope: ${names}` : ''));
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (invokedDirectly) {
  process.exitCode = main(process.argv.slice(2));
}
