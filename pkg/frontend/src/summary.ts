/**
 * Per-phase and overall statistics computed the same way (and in the same
 * order) as the harness `experiment summarize`, so values match exactly.
 */

import { DurationStats, LatencyStats, durationStats, latencyStats, mean } from './stats.js';
import { ResultSet } from './resultset.js';

export interface SummaryBlock {
  sync_latency: LatencyStats | null;
  workflow_duration: DurationStats | null;
  utilization_mean: number | null;
}

export interface Summary {
  label: Record<string, unknown>;
  overall: SummaryBlock;
  phases: Record<string, SummaryBlock>;
}

export function computeSummary(rs: ResultSet): Summary {
  const syncAll: number[] = [];
  const syncByPhase = new Map<string, number[]>();
  for (const r of rs.records) {
    if (r.mode !== 'sync') continue;
    const latency = r.end - r.arrival;
    syncAll.push(latency);
    if (!syncByPhase.has(r.phase)) syncByPhase.set(r.phase, []);
    syncByPhase.get(r.phase)!.push(latency);
  }

  const wfDuration = new Map<string, number>();
  const wfPhase = new Map<string, string>();
  const wfFirstArrival = new Map<string, number>();
  for (const r of rs.records) {
    wfDuration.set(r.workflow_id, (wfDuration.get(r.workflow_id) ?? 0.0) + (r.end - r.start));
    const first = wfFirstArrival.get(r.workflow_id);
    if (first === undefined || r.arrival < first) {
      wfFirstArrival.set(r.workflow_id, r.arrival);
      wfPhase.set(r.workflow_id, r.phase);
    }
  }
  const wfAll = [...wfDuration.values()];
  const wfByPhase = new Map<string, number[]>();
  for (const [wfId, duration] of wfDuration) {
    const phase = wfPhase.get(wfId)!;
    if (!wfByPhase.has(phase)) wfByPhase.set(phase, []);
    wfByPhase.get(phase)!.push(duration);
  }

  const utilByPhase = new Map<string, number[]>();
  const utilOverall: number[] = [];
  for (const { t, u } of rs.utilization) {
    if (t < rs.totalDuration) utilOverall.push(u);
    for (const { label, start, end } of rs.phaseBounds) {
      if (start <= t && t < end) {
        if (!utilByPhase.has(label)) utilByPhase.set(label, []);
        utilByPhase.get(label)!.push(u);
        break;
      }
    }
  }

  const block = (label: string | null): SummaryBlock => {
    const sync = label === null ? syncAll : (syncByPhase.get(label) ?? []);
    const wf = label === null ? wfAll : (wfByPhase.get(label) ?? []);
    const us = label === null ? utilOverall : (utilByPhase.get(label) ?? []);
    return {
      sync_latency: latencyStats(sync),
      workflow_duration: durationStats(wf),
      utilization_mean: us.length ? mean(us) : null,
    };
  };

  const labels = rs.phaseBounds.map((p) => p.label);
  if (rs.records.some((r) => r.phase === 'drain')) labels.push('drain');
  const phases: Record<string, SummaryBlock> = {};
  for (const label of labels) phases[label] = block(label);
  return { label: rs.label as unknown as Record<string, unknown>, overall: block(null), phases };
}

function fmt(v: number | null | undefined): string {
  return v === null || v === undefined ? '-' : v.toFixed(6);
}

export function formatSummary(summary: Summary): string {
  const label = summary.label as { policy?: string; mode?: string; time_scale?: number };
  const lines: string[] = [];
  lines.push(`run: policy=${label.policy ?? '?'} mode=${label.mode ?? '?'} time_scale=${label.time_scale ?? '?'}`);
  const header =
    'scope'.padEnd(12) +
    ' ' +
    'n_sync'.padStart(7) +
    ' ' +
    'lat_mean'.padStart(12) +
    ' ' +
    'lat_std'.padStart(12) +
    ' ' +
    'lat_p50'.padStart(12) +
    ' ' +
    'lat_p99'.padStart(12) +
    ' ' +
    'n_wf'.padStart(6) +
    ' ' +
    'wf_mean'.padStart(12) +
    ' ' +
    'wf_p99'.padStart(12) +
    ' ' +
    'util_mean'.padStart(10);
  lines.push(header);
  lines.push('-'.repeat(header.length));
  const row = (name: string, blk: SummaryBlock): string => {
    const sync = blk.sync_latency;
    const wf = blk.workflow_duration;
    return (
      name.padEnd(12) +
      ' ' +
      String(sync?.count ?? 0).padStart(7) +
      ' ' +
      fmt(sync?.mean).padStart(12) +
      ' ' +
      fmt(sync?.std).padStart(12) +
      ' ' +
      fmt(sync?.p50).padStart(12) +
      ' ' +
      fmt(sync?.p99).padStart(12) +
      ' ' +
      String(wf?.count ?? 0).padStart(6) +
      ' ' +
      fmt(wf?.mean).padStart(12) +
      ' ' +
      fmt(wf?.p99).padStart(12) +
      ' ' +
      fmt(blk.utilization_mean).padStart(10)
    );
  };
  lines.push(row('overall', summary.overall));
  for (const [name, blk] of Object.entries(summary.phases)) lines.push(row(name, blk));
  return lines.join('\n');
}
