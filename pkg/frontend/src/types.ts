/** Payload shapes of the planning service API. The UI treats these as the
 * single source of every number it displays. */

export interface AssumedParams {
  alpha0: number;
  alpha1: number;
  gamma: number[] | null;
}

export interface SurfacePayload {
  criterion: 'D_OPT' | 'BIN_ENT';
  assumed: AssumedParams;
  k_grid: number[];
  w_grid: number[];
  /** row-major [k][w]; null in infeasible cells */
  values: (number | null)[][];
  stderr: (number | null)[][];
  feasible: boolean[][];
  srs_reference: number;
  srs_stderr: number;
  n: number;
  B: number;
  seed: number;
  /** share of cohort scores above each cut-off, aligned with k_grid */
  stratum_fractions: number[] | null;
}

export interface SurfacePairResult {
  d_opt: SurfacePayload;
  bin_ent: SurfacePayload;
}

export interface DesignStats {
  phi_d: number;
  phi_d_stderr: number;
  phi_b: number;
  pbar: number;
}

export interface CompareResult {
  k: number;
  w: number;
  n: number;
  B: number;
  seed: number;
  max_feasible_n: number;
  stratum_fraction: number;
  feasible: boolean;
  pcc?: DesignStats;
  srs?: DesignStats;
  det_ratio?: number;
  prevalence_ratio?: number;
}

export interface PowerRow {
  test: string;
  n: number;
  power: number;
  stderr: number;
  dropped: number;
}

export interface PowerCurveBlock {
  alpha0: number;
  alpha1: number;
  design: string;
  rows: PowerRow[];
  unreliable: boolean;
}

export interface PowerResult {
  alpha_level: number;
  replicates: number;
  seed: number;
  curves: PowerCurveBlock[];
  unreliable: boolean;
}

export interface CohortSummary {
  cohort_id: string;
  n: number;
  p: number;
  has_labels: boolean;
  score_quantiles: Record<string, number>;
  histogram: { counts: number[]; edges: number[] };
}

export type JobKind = 'SURFACE' | 'POWER' | 'COMPARE';
export type JobState = 'queued' | 'running' | 'done' | 'failed';

export interface JobStatus {
  id: string;
  kind: JobKind;
  status: JobState;
  progress: number;
  seed: number | null;
  error?: string;
}

export interface JobResult<T> {
  id: string;
  kind: JobKind;
  seed: number | null;
  result: T;
}
