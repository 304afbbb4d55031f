/** Typed client for the planning service; the only place the UI touches
 * the network. */

import type {
  CohortSummary,
  JobKind,
  JobResult,
  JobStatus,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<never> {
  let detail: unknown = null;
  try {
    detail = (await resp.json()).detail;
  } catch {
    /* non-JSON body */
  }
  throw new ApiError(`request failed with ${resp.status}`, resp.status, detail);
}

export class PlannerClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async uploadScores(csv: string): Promise<CohortSummary> {
    const resp = await this.fetchImpl(this.url('/cohorts'), {
      method: 'POST',
      headers: { 'content-type': 'text/csv' },
      body: csv,
    });
    if (!resp.ok) await parseError(resp);
    return resp.json();
  }

  async submitJob(
    kind: JobKind,
    config: Record<string, unknown>,
    cohortId?: string,
  ): Promise<JobStatus> {
    const body: Record<string, unknown> = { kind, config };
    if (cohortId) body.cohort_id = cohortId;
    const resp = await this.fetchImpl(this.url('/jobs'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) await parseError(resp);
    return resp.json();
  }

  async getJob(id: string): Promise<JobStatus> {
    const resp = await this.fetchImpl(this.url(`/jobs/${id}`));
    if (!resp.ok) await parseError(resp);
    return resp.json();
  }

  async getResult<T>(id: string): Promise<JobResult<T>> {
    const resp = await this.fetchImpl(this.url(`/jobs/${id}/result`));
    if (!resp.ok) await parseError(resp);
    return resp.json();
  }

  async cancelJob(id: string): Promise<void> {
    const resp = await this.fetchImpl(this.url(`/jobs/${id}`), { method: 'DELETE' });
    if (!resp.ok) await parseError(resp);
  }

  /** Poll until the job reaches a terminal state; reports progress along
   * the way.  Resolves with the final status ('done' or 'failed'). */
  async pollJob(
    id: string,
    opts: {
      intervalMs?: number;
      timeoutMs?: number;
      onProgress?: (fraction: number) => void;
      sleep?: (ms: number) => Promise<void>;
    } = {},
  ): Promise<JobStatus> {
    const interval = opts.intervalMs ?? 500;
    const timeout = opts.timeoutMs ?? 600_000;
    const sleep =
      opts.sleep ?? ((ms: number) => new Promise<void>((r) => setTimeout(r, ms)));
    const start = Date.now();
    for (;;) {
      const status = await this.getJob(id);
      opts.onProgress?.(status.progress);
      if (status.status === 'done' || status.status === 'failed') return status;
      if (Date.now() - start > timeout) {
        throw new ApiError(`job ${id} timed out`, 0, null);
      }
      await sleep(interval);
    }
  }
}
