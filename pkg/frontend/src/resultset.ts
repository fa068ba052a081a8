/**
 * Loading and validating one experiment result directory: invocations.csv,
 * utilization.csv and run.json, exactly as the harness writes them.
 */

import fs from 'node:fs';
import path from 'node:path';
import Papa from 'papaparse';

export interface InvocationRow {
  workflow_id: string;
  invocation_id: string;
  function: string;
  mode: string;
  arrival: number;
  deadline: number | null;
  dispatch: number;
  start: number;
  end: number;
  phase: string;
}

export interface UtilizationRow {
  t: number;
  u: number;
}

export interface PhaseBound {
  label: string;
  start: number;
  end: number;
}

export interface RunLabel {
  policy: string;
  mode: string;
  time_scale: number;
}

export interface ResultSet {
  dir: string;
  label: RunLabel;
  records: InvocationRow[];
  utilization: UtilizationRow[];
  phaseBounds: PhaseBound[];
  totalDuration: number;
}

function parseCsv(file: string): Record<string, string>[] {
  const text = fs.readFileSync(file, 'utf-8');
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${file}: ${parsed.errors[0].message} (row ${parsed.errors[0].row})`);
  }
  return parsed.data;
}

export function loadResultSet(dir: string): ResultSet {
  const runMeta = JSON.parse(fs.readFileSync(path.join(dir, 'run.json'), 'utf-8'));
  if (runMeta.valid === false) {
    throw new Error(`${dir}: run.json is flagged invalid (${runMeta.error ?? 'unknown error'})`);
  }
  const records: InvocationRow[] = parseCsv(path.join(dir, 'invocations.csv')).map((row) => ({
    workflow_id: row.workflow_id,
    invocation_id: row.invocation_id,
    function: row.function,
    mode: row.mode,
    arrival: parseFloat(row.arrival_s),
    deadline: row.deadline_s === '' ? null : parseFloat(row.deadline_s),
    dispatch: parseFloat(row.dispatch_s),
    start: parseFloat(row.start_s),
    end: parseFloat(row.end_s),
    phase: row.phase,
  }));
  const utilization: UtilizationRow[] = parseCsv(path.join(dir, 'utilization.csv')).map((row) => ({
    t: parseFloat(row.t_s),
    u: parseFloat(row.utilization),
  }));

  for (let i = 1; i < utilization.length; i++) {
    if (utilization[i].t < utilization[i - 1].t) {
      throw new Error(`${dir}: utilization rows not time-ordered at index ${i}`);
    }
  }

  const timeScale: number = runMeta.config.time_scale;
  const phaseBounds: PhaseBound[] = [];
  let cursor = 0.0;
  for (const p of runMeta.config.phases) {
    const duration = p.duration_s * timeScale;
    phaseBounds.push({ label: p.label, start: cursor, end: cursor + duration });
    cursor += duration;
  }

  return {
    dir,
    label: runMeta.label as RunLabel,
    records,
    utilization,
    phaseBounds,
    totalDuration: cursor,
  };
}
