import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { ExplorerSession } from '../src/session';
import type { CompareResult, SurfacePairResult } from '../src/types';

const surfaces = (
  JSON.parse(
    readFileSync(new URL('./fixtures/surface_pair.json', import.meta.url), 'utf8'),
  ) as { result: SurfacePairResult }
).result;

const reference = (
  JSON.parse(
    readFileSync(new URL('./fixtures/compare_reference.json', import.meta.url), 'utf8'),
  ) as { result: CompareResult }
).result;

function sessionWithSurfaces(): ExplorerSession {
  const session = new ExplorerSession();
  session.attachSurfaces('job-1', surfaces);
  return session;
}

describe('ExplorerSession', () => {
  it('feasibility mirrors the service mask cell for cell', () => {
    const session = sessionWithSurfaces();
    for (let ki = 0; ki < surfaces.d_opt.k_grid.length; ki += 1) {
      for (let wi = 0; wi < surfaces.d_opt.w_grid.length; wi += 1) {
        expect(session.isFeasible(ki, wi)).toBe(surfaces.d_opt.feasible[ki][wi]);
      }
    }
  });

  it('selection succeeds only on feasible cells', () => {
    const session = sessionWithSurfaces();
    const mask = surfaces.d_opt.feasible;
    let feasibleCell: [number, number] | null = null;
    let infeasibleCell: [number, number] | null = null;
    mask.forEach((row, ki) =>
      row.forEach((f, wi) => {
        if (f && !feasibleCell) feasibleCell = [ki, wi];
        if (!f && !infeasibleCell) infeasibleCell = [ki, wi];
      }),
    );
    expect(feasibleCell).not.toBeNull();
    expect(session.selectCell(...feasibleCell!)).toBe(true);
    expect(session.selected!.k).toBe(surfaces.d_opt.k_grid[feasibleCell![0]]);
    if (infeasibleCell) {
      const before = session.selected;
      expect(session.selectCell(...infeasibleCell)).toBe(false);
      expect(session.selected).toBe(before);
    }
  });

  it('selection is rejected before surfaces arrive', () => {
    const session = new ExplorerSession();
    expect(session.selectCell(0, 0)).toBe(false);
  });

  it('pinned comparisons keep their job references', () => {
    const session = sessionWithSurfaces();
    session.pinComparison('job-42', reference);
    expect(session.pinned).toHaveLength(1);
    expect(session.pinned[0].jobId).toBe('job-42');
    expect(session.pinned[0].result.det_ratio).toBe(reference.det_ratio);
  });

  it('exports a CLI-shaped surface config', () => {
    const session = sessionWithSurfaces();
    session.seed = 7;
    session.grid = { n_k: 12, n_w: 10, n: 80, B: 150 };
    const cfg = session.exportSurfaceConfig() as Record<string, any>;
    expect(cfg.grid).toEqual({ n_k: 12, n_w: 10, n: 80, B: 150 });
    expect(cfg.seed).toBe(7);
    expect(cfg.assumed).toEqual({ alpha0: 0, alpha1: 1, gamma: null });
    expect(cfg.cohort.kind).toBeDefined();
  });

  it('exports a what-if power config for the selected cell', () => {
    const session = sessionWithSurfaces();
    const mask = surfaces.d_opt.feasible;
    outer: for (let ki = 0; ki < mask.length; ki += 1) {
      for (let wi = 0; wi < mask[ki].length; wi += 1) {
        if (mask[ki][wi]) {
          session.selectCell(ki, wi);
          break outer;
        }
      }
    }
    const cfg = session.exportPowerConfig(
      [{ alpha0: -0.405, alpha1: 0.8 }],
      [150, 350],
    ) as Record<string, any>;
    expect(cfg.designs).toHaveLength(2);
    expect(cfg.designs[0].kind).toBe('srs');
    expect(cfg.designs[1]).toEqual({
      kind: 'pcc',
      k: session.selected!.k,
      w: session.selected!.w,
    });
    expect(cfg.sample_sizes).toEqual([150, 350]);
  });

  it('refuses a power config without a selection', () => {
    const session = sessionWithSurfaces();
    expect(() => session.exportPowerConfig([{ alpha0: 0, alpha1: 1 }], [100])).toThrow(
      /select/,
    );
  });
});
