/** Browser bootstrap: wires the explorer widgets to the planning service.
 * All modelling logic lives in the importable modules; this file only
 * moves data between the DOM and the API client. */

import { PlannerClient } from './api';
import { comparisonHtml, buildComparisonPanel } from './compare';
import { buildHeatmapModel, surfacePairSvg } from './heatmap';
import { buildPowerOverlay, powerOverlaySvg } from './power';
import { ExplorerSession } from './session';
import type { CompareResult, PowerResult, SurfacePairResult } from './types';

const client = new PlannerClient(
  (window as unknown as { PCC_API_BASE?: string }).PCC_API_BASE ?? 'http://127.0.0.1:8000',
);
const session = new ExplorerSession();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string): void {
  el('status').textContent = text;
}

async function uploadScores(): Promise<void> {
  const input = el<HTMLInputElement>('score-file');
  const file = input.files?.[0];
  if (!file) return;
  setStatus('uploading scores…');
  const summary = await client.uploadScores(await file.text());
  session.attachCohort(summary);
  el('cohort-info').textContent =
    `${summary.n} subjects, median score ${summary.score_quantiles['0.5']}`;
  setStatus('cohort ready');
}

async function runSurfaces(): Promise<void> {
  setStatus('estimating surfaces…');
  const job = await client.submitJob(
    'SURFACE',
    {
      grid: { ...session.grid },
      assumed: { ...session.assumed },
      ...(session.seed !== null ? { seed: session.seed } : {}),
    },
    session.cohort?.cohort_id,
  );
  session.seed = job.seed;
  const final = await client.pollJob(job.id, {
    onProgress: (f) => setStatus(`estimating surfaces… ${(100 * f).toFixed(0)}%`),
  });
  if (final.status === 'failed') {
    setStatus(`surface job failed: ${final.error ?? 'unknown error'}`);
    return;
  }
  const { result } = await client.getResult<SurfacePairResult>(job.id);
  session.attachSurfaces(job.id, result);
  const dModel = buildHeatmapModel(result.d_opt);
  const bModel = buildHeatmapModel(result.bin_ent);
  el('surfaces').innerHTML = surfacePairSvg(dModel, bModel);
  bindCellClicks();
  setStatus('surfaces ready; click a cell to compare against SRS');
}

function bindCellClicks(): void {
  el('surfaces')
    .querySelectorAll<SVGRectElement>('rect[data-ki]')
    .forEach((rect) => {
      rect.addEventListener('click', () => {
        const ki = Number(rect.dataset.ki);
        const wi = Number(rect.dataset.wi);
        if (!session.selectCell(ki, wi)) {
          setStatus('cell is infeasible for the configured sample size');
          return;
        }
        void compareSelected();
      });
    });
}

async function compareSelected(): Promise<void> {
  if (!session.selected) return;
  setStatus(`comparing (k=${session.selected.k}, w=${session.selected.w})…`);
  const job = await client.submitJob(
    'COMPARE',
    {
      k: session.selected.k,
      w: session.selected.w,
      n: session.grid.n,
      B: 500,
      ...(session.seed !== null ? { seed: session.seed } : {}),
    },
    session.cohort?.cohort_id,
  );
  const final = await client.pollJob(job.id);
  if (final.status === 'failed') {
    setStatus(`comparison failed: ${final.error ?? 'unknown error'}`);
    return;
  }
  const { result } = await client.getResult<CompareResult>(job.id);
  el('comparison').innerHTML = comparisonHtml(buildComparisonPanel(result));
  session.pinComparison(job.id, result);
  setStatus('comparison ready');
}

async function runWhatIfPower(): Promise<void> {
  if (!session.selected) {
    setStatus('select a feasible cell first');
    return;
  }
  const alpha0 = Number(el<HTMLInputElement>('effect-a0').value);
  const alpha1 = Number(el<HTMLInputElement>('effect-a1').value);
  const sizes = el<HTMLInputElement>('power-sizes')
    .value.split(',')
    .map((s) => Number(s.trim()))
    .filter((n) => Number.isFinite(n) && n > 0);
  setStatus('running power simulation…');
  const config = session.exportPowerConfig([{ alpha0, alpha1 }], sizes);
  const job = await client.submitJob('POWER', config, session.cohort?.cohort_id);
  const final = await client.pollJob(job.id, {
    onProgress: (f) => setStatus(`power simulation… ${(100 * f).toFixed(0)}%`),
  });
  if (final.status === 'failed') {
    setStatus(`power job failed: ${final.error ?? 'unknown error'}`);
    return;
  }
  const { result } = await client.getResult<PowerResult>(job.id);
  el('power-overlay').innerHTML = powerOverlaySvg(buildPowerOverlay(result));
  setStatus('power overlay ready');
}

function exportSessionConfig(): void {
  const blob = new Blob([JSON.stringify(session.exportSurfaceConfig(), null, 2)], {
    type: 'application/json',
  });
  const a = document.createElement('a');
  a.href = URL.createObjectURL(blob);
  a.download = 'surface_config.json';
  a.click();
}

export function boot(): void {
  el('score-file').addEventListener('change', () => void uploadScores());
  el('run-surfaces').addEventListener('click', () => void runSurfaces());
  el('run-power').addEventListener('click', () => void runWhatIfPower());
  el('export-config').addEventListener('click', exportSessionConfig);
  setStatus('upload a score CSV or run surfaces on a synthetic cohort');
}

boot();
