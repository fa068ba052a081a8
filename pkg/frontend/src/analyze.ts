#!/usr/bin/env node
/**
 * analyze --in <dir> [--compare <dir2>] --out <dir>
 *
 * Reads harness result directories, prints the per-phase summary for each
 * (same numbers as `experiment summarize`), writes analysis_summary.json,
 * and renders cpu_timeline.svg, latency_ecdf.svg and workflow_duration.svg
 * into the output directory. Inputs are never modified. Exit codes:
 * 0 success, 1 runtime/empty-input failure, 2 usage error.
 */

import fs from 'node:fs';
import path from 'node:path';

import { plotCpuTimeline, plotLatencyEcdf, plotWorkflowDuration } from './figures.js';
import { ResultSet, loadResultSet } from './resultset.js';
import { Summary, computeSummary, formatSummary } from './summary.js';

interface Args {
  indir: string;
  compare: string | null;
  outdir: string;
}

export function parseArgs(argv: string[]): Args {
  let indir: string | null = null;
  let compare: string | null = null;
  let outdir: string | null = null;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === '--in') indir = argv[++i];
    else if (a === '--compare') compare = argv[++i];
    else if (a === '--out') outdir = argv[++i];
    else throw new UsageError(`unknown argument ${a}`);
  }
  if (!indir || !outdir) throw new UsageError('required: --in <dir> --out <dir>');
  return { indir, compare, outdir };
}

export class UsageError extends Error {}

export interface AnalysisOutput {
  summaries: Array<{ dir: string; summary: Summary }>;
  figures: string[];
}

export function analyze(args: Args): AnalysisOutput {
  const results: ResultSet[] = [loadResultSet(args.indir)];
  if (args.compare) results.push(loadResultSet(args.compare));

  const summaries = results.map((rs) => ({ dir: rs.dir, summary: computeSummary(rs) }));

  // validate all inputs before any file is written
  for (const rs of results) {
    if (rs.utilization.length === 0) throw new Error(`${rs.dir}: utilization table is empty`);
    if (!rs.records.some((r) => r.mode === 'sync')) throw new Error(`${rs.dir}: no sync records`);
  }

  fs.mkdirSync(args.outdir, { recursive: true });
  const peakPhase = results[0].phaseBounds[0]?.label ?? 'load_peak';
  const figures = [
    path.join(args.outdir, 'cpu_timeline.svg'),
    path.join(args.outdir, 'latency_ecdf.svg'),
    path.join(args.outdir, 'workflow_duration.svg'),
  ];
  plotCpuTimeline(results, figures[0]);
  plotLatencyEcdf(results, peakPhase, figures[1]);
  plotWorkflowDuration(results, figures[2]);

  fs.writeFileSync(
    path.join(args.outdir, 'analysis_summary.json'),
    JSON.stringify(
      Object.fromEntries(summaries.map(({ dir, summary }) => [dir, summary])),
      null,
      2,
    ) + '\n',
  );
  return { summaries, figures };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const out = analyze(args);
    for (const { dir, summary } of out.summaries) {
      console.log(`# ${dir}`);
      console.log(formatSummary(summary));
      console.log('');
    }
    for (const f of out.figures) console.log(`wrote ${f}`);
    return 0;
  } catch (err) {
    console.error(`analyze failed: ${(err as Error).message}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
