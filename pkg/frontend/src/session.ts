/** Client-held explorer session: cohort handle, assumed parameters, grid,
 * selected cell, pinned comparisons.  Exportable as a batch-CLI config so
 * an interactive plan can be rerun exactly offline. */

import type {
  AssumedParams,
  CohortSummary,
  CompareResult,
  SurfacePairResult,
} from './types';

export interface GridSettings {
  n_k: number;
  n_w: number;
  n: number;
  B: number;
}

export interface PinnedComparison {
  jobId: string;
  result: CompareResult;
}

export interface SelectedCell {
  ki: number;
  wi: number;
  k: number;
  w: number;
}

export class ExplorerSession {
  cohort: CohortSummary | null = null;
  assumed: AssumedParams = { alpha0: 0, alpha1: 1, gamma: null };
  grid: GridSettings = { n_k: 25, n_w: 25, n: 100, B: 200 };
  seed: number | null = null;
  surfaces: SurfacePairResult | null = null;
  surfaceJobId: string | null = null;
  selected: SelectedCell | null = null;
  pinned: PinnedComparison[] = [];

  attachCohort(summary: CohortSummary): void {
    this.cohort = summary;
    this.surfaces = null;
    this.selected = null;
  }

  attachSurfaces(jobId: string, result: SurfacePairResult): void {
    this.surfaceJobId = jobId;
    this.surfaces = result;
  }

  /** Cell feasibility straight from the service mask. */
  isFeasible(ki: number, wi: number): boolean {
    if (!this.surfaces) return false;
    const mask = this.surfaces.d_opt.feasible;
    return Boolean(mask[ki]?.[wi]);
  }

  /** Select a cell; returns false (and leaves the selection unchanged)
   * when the service mask marks it infeasible. */
  selectCell(ki: number, wi: number): boolean {
    if (!this.surfaces || !this.isFeasible(ki, wi)) return false;
    this.selected = {
      ki,
      wi,
      k: this.surfaces.d_opt.k_grid[ki],
      w: this.surfaces.d_opt.w_grid[wi],
    };
    return true;
  }

  pinComparison(jobId: string, result: CompareResult): void {
    this.pinned.push({ jobId, result });
  }

  /** Surface-run config consumable by the batch CLI (`surface` command). */
  exportSurfaceConfig(): Record<string, unknown> {
    const cohort = this.cohort
      ? { kind: 'file', path: `cohort_${this.cohort.cohort_id}.csv` }
      : { kind: 'normal_scores', n: 10_000 };
    return {
      cohort,
      grid: { ...this.grid },
      assumed: { ...this.assumed },
      seed: this.seed ?? 0,
    };
  }

  /** Power what-if config for the selected cell (CLI `power` command). */
  exportPowerConfig(
    effects: { alpha0: number; alpha1: number }[],
    sampleSizes: number[],
    replicates = 200,
  ): Record<string, unknown> {
    if (!this.selected) throw new Error('select a feasible cell first');
    return {
      cohort: this.cohort
        ? { kind: 'file', path: `cohort_${this.cohort.cohort_id}.csv` }
        : { kind: 'lda' },
      alpha0_values: effects.map((e) => e.alpha0),
      alpha1_values: effects.map((e) => e.alpha1),
      designs: [
        { kind: 'srs' },
        { kind: 'pcc', k: this.selected.k, w: this.selected.w },
      ],
      sample_sizes: [...sampleSizes],
      replicates,
      seed: this.seed ?? 0,
    };
  }
}
