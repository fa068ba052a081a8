/**
 * The three result views: CPU-utilization timeline with phase boundaries,
 * request-response latency ECDF (load-peak panel and overall panel), and
 * workflow duration against workflow start time.
 */

import fs from 'node:fs';

import { ResultSet } from './resultset.js';
import { ecdf } from './stats.js';
import { LinearScale, PanelSpec, SERIES_COLORS, SvgDoc, extentOf } from './svg.js';

const MARGIN = { left: 52, right: 16, top: 30, bottom: 44 };

function seriesName(rs: ResultSet): string {
  return rs.label.policy;
}

export function plotCpuTimeline(results: ResultSet[], outPath: string): void {
  for (const rs of results) {
    if (rs.utilization.length === 0) throw new Error(`${rs.dir}: utilization table is empty`);
  }
  const width = 640;
  const height = 320;
  const doc = new SvgDoc(width, height);
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const allT = results.flatMap((r) => r.utilization.map((s) => s.t / 60.0));
  const xScale = new LinearScale(extentOf(allT), [MARGIN.left, MARGIN.left + plotW]);
  const yScale = new LinearScale({ min: 0, max: 100 }, [MARGIN.top + plotH, MARGIN.top]);
  const spec: PanelSpec = {
    x: MARGIN.left,
    y: MARGIN.top,
    width: plotW,
    height: plotH,
    title: 'CPU utilization',
    xLabel: 'minutes',
    yLabel: '% CPU',
    xScale,
    yScale,
  };
  doc.panel(spec);
  for (const bound of results[0].phaseBounds) {
    const px = xScale.apply(bound.end / 60.0);
    doc.line(px, MARGIN.top, px, MARGIN.top + plotH, '#999', 'stroke-dasharray="4 3"');
  }
  results.forEach((rs, i) => {
    doc.polyline(
      rs.utilization.map((s) => [xScale.apply(s.t / 60.0), yScale.apply(s.u * 100)]),
      SERIES_COLORS[i % SERIES_COLORS.length],
    );
  });
  doc.legend(MARGIN.left + 8, MARGIN.top + plotH - 10 - 14 * results.length, results.map((r, i) => [seriesName(r), SERIES_COLORS[i % SERIES_COLORS.length]]));
  fs.writeFileSync(outPath, doc.render());
}

function syncLatencies(rs: ResultSet, phase: string | null): number[] {
  const out: number[] = [];
  for (const r of rs.records) {
    if (r.mode !== 'sync') continue;
    if (phase !== null && r.phase !== phase) continue;
    out.push(r.end - r.arrival);
  }
  return out;
}

export function plotLatencyEcdf(results: ResultSet[], peakPhase: string, outPath: string): void {
  for (const rs of results) {
    if (syncLatencies(rs, null).length === 0) throw new Error(`${rs.dir}: no sync records`);
  }
  const width = 680;
  const height = 300;
  const doc = new SvgDoc(width, height);
  const panelW = (width - MARGIN.left * 2 - MARGIN.right) / 2;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const panels: Array<[string, string | null, number]> = [
    [`load peak (${peakPhase})`, peakPhase, MARGIN.left],
    ['overall', null, MARGIN.left * 2 + panelW],
  ];
  for (const [title, phase, x0] of panels) {
    const values = results.flatMap((rs) => syncLatencies(rs, phase));
    const xScale = new LinearScale(extentOf(values, 0.05), [x0, x0 + panelW]);
    const yScale = new LinearScale({ min: 0, max: 1 }, [MARGIN.top + plotH, MARGIN.top]);
    doc.panel({
      x: x0,
      y: MARGIN.top,
      width: panelW,
      height: plotH,
      title,
      xLabel: 'latency (s)',
      yLabel: 'ECDF',
      xScale,
      yScale,
    });
    results.forEach((rs, i) => {
      const pts = ecdf(syncLatencies(rs, phase));
      if (pts.length === 0) return;
      const poly: Array<[number, number]> = [[xScale.apply(pts[0][0]), yScale.apply(0)]];
      let prevY = 0;
      for (const [v, f] of pts) {
        poly.push([xScale.apply(v), yScale.apply(prevY)]);
        poly.push([xScale.apply(v), yScale.apply(f)]);
        prevY = f;
      }
      doc.polyline(poly, SERIES_COLORS[i % SERIES_COLORS.length]);
    });
  }
  doc.legend(MARGIN.left + 8, MARGIN.top + 12, results.map((r, i) => [seriesName(r), SERIES_COLORS[i % SERIES_COLORS.length]]));
  fs.writeFileSync(outPath, doc.render());
}

export function plotWorkflowDuration(results: ResultSet[], outPath: string): void {
  const perSet = results.map((rs) => {
    const start = new Map<string, number>();
    const duration = new Map<string, number>();
    for (const r of rs.records) {
      duration.set(r.workflow_id, (duration.get(r.workflow_id) ?? 0) + (r.end - r.start));
      const s = start.get(r.workflow_id);
      if (s === undefined || r.arrival < s) start.set(r.workflow_id, r.arrival);
    }
    return [...duration.keys()].map((wf) => ({ start: start.get(wf)! / 60.0, duration: duration.get(wf)! }));
  });
  if (perSet.every((points) => points.length === 0)) {
    throw new Error('no complete workflows in any input');
  }
  const width = 640;
  const height = 320;
  const doc = new SvgDoc(width, height);
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const xScale = new LinearScale(extentOf(perSet.flat().map((p) => p.start), 0.02), [MARGIN.left, MARGIN.left + plotW]);
  const yScale = new LinearScale(extentOf(perSet.flat().map((p) => p.duration), 0.05), [MARGIN.top + plotH, MARGIN.top]);
  doc.panel({
    x: MARGIN.left,
    y: MARGIN.top,
    width: plotW,
    height: plotH,
    title: 'Workflow duration',
    xLabel: 'workflow start (minutes)',
    yLabel: 'duration (s)',
    xScale,
    yScale,
  });
  perSet.forEach((points, i) => {
    for (const p of points) {
      doc.circle(xScale.apply(p.start), yScale.apply(p.duration), 2.2, SERIES_COLORS[i % SERIES_COLORS.length]);
    }
  });
  doc.legend(MARGIN.left + 8, MARGIN.top + 12, results.map((r, i) => [seriesName(r), SERIES_COLORS[i % SERIES_COLORS.length]]));
  fs.writeFileSync(outPath, doc.render());
}
