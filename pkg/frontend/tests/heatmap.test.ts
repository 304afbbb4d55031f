import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { buildHeatmapModel, heatmapSvg, surfacePairSvg } from '../src/heatmap';
import type { SurfacePairResult, SurfacePayload } from '../src/types';

const fixture = JSON.parse(
  readFileSync(new URL('./fixtures/surface_pair.json', import.meta.url), 'utf8'),
) as { result: SurfacePairResult };

const dOpt = fixture.result.d_opt;
const binEnt = fixture.result.bin_ent;

describe('buildHeatmapModel', () => {
  it('binds every cell value exactly to the payload', () => {
    const model = buildHeatmapModel(dOpt);
    expect(model.cells).toHaveLength(dOpt.k_grid.length * dOpt.w_grid.length);
    for (const cell of model.cells) {
      const payloadValue = dOpt.values[cell.ki][cell.wi];
      if (dOpt.feasible[cell.ki][cell.wi]) {
        expect(cell.value).toBe(payloadValue);
        expect(cell.tooltip).toContain(String(payloadValue));
      } else {
        expect(cell.value).toBeNull();
        expect(cell.tooltip).toContain('infeasible');
      }
    }
  });

  it('color range matches the payload min/max', () => {
    const model = buildHeatmapModel(dOpt);
    const feasible = dOpt.values
      .flatMap((row, ki) => row.filter((_, wi) => dOpt.feasible[ki][wi]))
      .filter((v): v is number => v !== null);
    expect(model.colorScale.min).toBe(Math.min(...feasible));
    expect(model.colorScale.max).toBe(Math.max(...feasible));
    for (const cell of model.cells) {
      if (cell.colorT !== null) {
        expect(cell.colorT).toBeGreaterThanOrEqual(0);
        expect(cell.colorT).toBeLessThanOrEqual(1);
      }
    }
  });

  it('carries the SRS-equivalent curve from payload stratum fractions', () => {
    const model = buildHeatmapModel(dOpt);
    expect(model.srsCurve).toHaveLength(dOpt.k_grid.length);
    model.srsCurve.forEach((pt, ki) => {
      expect(pt.w).toBe(dOpt.stratum_fractions![ki]);
    });
  });

  it('entropy surface values stay within [0, 1]', () => {
    const model = buildHeatmapModel(binEnt);
    for (const cell of model.cells) {
      if (cell.value !== null) {
        expect(cell.value).toBeGreaterThanOrEqual(0);
        expect(cell.value).toBeLessThanOrEqual(1);
      }
    }
  });

  it('renders a degenerate 1x1 surface without crashing', () => {
    const single: SurfacePayload = {
      ...dOpt,
      k_grid: [dOpt.k_grid[0]],
      w_grid: [dOpt.w_grid[0]],
      values: [[dOpt.values[0][0]]],
      stderr: [[dOpt.stderr[0][0]]],
      feasible: [[true]],
      stratum_fractions: [dOpt.stratum_fractions![0]],
    };
    const svg = heatmapSvg(buildHeatmapModel(single));
    expect(svg).toContain('<rect');
    expect(svg).toContain(String(dOpt.values[0][0]));
  });

  it('refuses to render a fully infeasible surface', () => {
    const dead: SurfacePayload = {
      ...dOpt,
      values: dOpt.values.map((row) => row.map(() => null)),
      feasible: dOpt.feasible.map((row) => row.map(() => false)),
    };
    expect(() => buildHeatmapModel(dead)).toThrow(/feasible/);
  });
});

describe('heatmapSvg', () => {
  it('embeds exact values as data attributes and tooltips', () => {
    const model = buildHeatmapModel(dOpt);
    const svg = heatmapSvg(model);
    for (const cell of model.cells) {
      if (cell.value !== null) {
        expect(svg).toContain(`data-value="${String(cell.value)}"`);
      }
    }
    expect(svg).toContain('data-role="srs-curve"');
  });

  it('hatches infeasible cells', () => {
    const dead: SurfacePayload = {
      ...dOpt,
      feasible: dOpt.feasible.map((row, ki) =>
        row.map((f, wi) => (ki === 0 && wi === 0 ? false : f)),
      ),
      values: dOpt.values.map((row, ki) =>
        row.map((v, wi) => (ki === 0 && wi === 0 ? null : v)),
      ),
    };
    const svg = heatmapSvg(buildHeatmapModel(dead));
    expect(svg).toContain('url(#hatch)');
  });

  it('renders the surface pair side by side', () => {
    const svg = surfacePairSvg(buildHeatmapModel(dOpt), buildHeatmapModel(binEnt));
    expect(svg).toContain('D-optimality');
    expect(svg).toContain('Binary entropy');
  });
});
