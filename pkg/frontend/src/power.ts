/** What-if power overlays: curves with error bands per design, pinnable
 * across repeated launches.  All numbers come from POWER job payloads. */

import type { PowerCurveBlock, PowerResult } from './types';

export interface PowerSeriesPoint {
  n: number;
  power: number;
  stderr: number;
  lower: number;
  upper: number;
}

export interface PowerSeries {
  design: string;
  test: string;
  alpha0: number;
  alpha1: number;
  points: PowerSeriesPoint[];
  unreliable: boolean;
}

export interface PowerOverlay {
  alphaLevel: number;
  replicates: number;
  seed: number;
  series: PowerSeries[];
}

function toSeries(block: PowerCurveBlock, test: string): PowerSeries {
  const rows = block.rows
    .filter((r) => r.test === test)
    .sort((a, b) => a.n - b.n);
  return {
    design: block.design,
    test,
    alpha0: block.alpha0,
    alpha1: block.alpha1,
    points: rows.map((r) => ({
      n: r.n,
      power: r.power,
      stderr: r.stderr,
      lower: Math.max(0, r.power - 2 * r.stderr),
      upper: Math.min(1, r.power + 2 * r.stderr),
    })),
    unreliable: block.unreliable,
  };
}

export function buildPowerOverlay(
  result: PowerResult,
  test = 'LOGISTIC_RECAL',
): PowerOverlay {
  return {
    alphaLevel: result.alpha_level,
    replicates: result.replicates,
    seed: result.seed,
    series: result.curves.map((block) => toSeries(block, test)),
  };
}

/** Smallest measured n whose power reaches the target; Infinity when the
 * curve never does within the sampled range. */
export function firstNReaching(series: PowerSeries, target: number): number {
  for (const p of series.points) {
    if (p.power >= target) return p.n;
  }
  return Infinity;
}

export function powerOverlaySvg(
  overlay: PowerOverlay,
  opts: { width?: number; height?: number } = {},
): string {
  const width = opts.width ?? 480;
  const height = opts.height ?? 320;
  const margin = { left: 48, right: 12, top: 16, bottom: 32 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const ns = overlay.series.flatMap((s) => s.points.map((p) => p.n));
  const nMin = Math.min(...ns);
  const nMax = Math.max(...ns);
  const x = (n: number) =>
    margin.left + (nMax === nMin ? 0.5 : (n - nMin) / (nMax - nMin)) * plotW;
  const y = (p: number) => margin.top + (1 - p) * plotH;

  const colors = ['#1d4ed8', '#b91c1c', '#047857', '#7c3aed'];
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">`,
  ];
  // reference line at 80% power
  parts.push(
    `<line x1="${margin.left}" y1="${y(0.8).toFixed(2)}" x2="${margin.left + plotW}" ` +
      `y2="${y(0.8).toFixed(2)}" stroke="#9ca3af" stroke-dasharray="3,3"/>`,
  );
  overlay.series.forEach((s, i) => {
    const color = colors[i % colors.length];
    const band = [
      ...s.points.map((p) => `${x(p.n).toFixed(2)},${y(p.upper).toFixed(2)}`),
      ...[...s.points].reverse().map((p) => `${x(p.n).toFixed(2)},${y(p.lower).toFixed(2)}`),
    ].join(' ');
    parts.push(
      `<polygon points="${band}" fill="${color}" opacity="0.15" data-role="band" data-design="${s.design}"/>`,
    );
    const line = s.points
      .map((p) => `${x(p.n).toFixed(2)},${y(p.power).toFixed(2)}`)
      .join(' ');
    parts.push(
      `<polyline points="${line}" fill="none" stroke="${color}" stroke-width="2" ` +
        `data-role="curve" data-design="${s.design}"/>`,
    );
    for (const p of s.points) {
      parts.push(
        `<circle cx="${x(p.n).toFixed(2)}" cy="${y(p.power).toFixed(2)}" r="3" ` +
          `fill="${color}" data-design="${s.design}" data-n="${p.n}" ` +
          `data-power="${String(p.power)}"><title>${s.design} n=${p.n}: ${p.power}</title></circle>`,
      );
    }
  });
  parts.push(
    `<text x="${margin.left}" y="${height - 8}" font-size="11" font-family="sans-serif">n=${nMin}</text>`,
    `<text x="${margin.left + plotW - 48}" y="${height - 8}" font-size="11" font-family="sans-serif">n=${nMax}</text>`,
    '</svg>',
  );
  return parts.join('');
}
