/** Comparison panel for a selected (k, w) cell against the SRS baseline.
 *
 * Every displayed quantity is copied from the COMPARE job payload; the
 * panel never derives ratios or information values itself.  Infeasible
 * cells block selection with the stratum arithmetic that explains why.
 */

import type { CompareResult } from './types';

export interface ComparisonRow {
  label: string;
  pcc: number | string;
  srs: number | string;
}

export interface ComparisonPanel {
  kind: 'comparison';
  k: number;
  w: number;
  maxFeasibleN: number;
  rows: ComparisonRow[];
  detRatio: number;
  prevalenceRatio: number;
}

export interface BlockedSelection {
  kind: 'blocked';
  k: number;
  w: number;
  maxFeasibleN: number;
  requestedN: number;
  explanation: string;
}

export type SelectionOutcome = ComparisonPanel | BlockedSelection;

export function buildComparisonPanel(result: CompareResult): SelectionOutcome {
  if (!result.feasible || !result.pcc || !result.srs) {
    return {
      kind: 'blocked',
      k: result.k,
      w: result.w,
      maxFeasibleN: result.max_feasible_n,
      requestedN: result.n,
      explanation:
        `only a fraction ${result.stratum_fraction} of cohort scores exceed ` +
        `k=${result.k}, so with stratum weight w=${result.w} at most ` +
        `${result.max_feasible_n} subjects can be drawn; ${result.n} were requested`,
    };
  }
  return {
    kind: 'comparison',
    k: result.k,
    w: result.w,
    maxFeasibleN: result.max_feasible_n,
    detRatio: result.det_ratio!,
    prevalenceRatio: result.prevalence_ratio!,
    rows: [
      { label: 'information (log det)', pcc: result.pcc.phi_d, srs: result.srs.phi_d },
      { label: 'binary entropy', pcc: result.pcc.phi_b, srs: result.srs.phi_b },
      { label: 'expected sample prevalence', pcc: result.pcc.pbar, srs: result.srs.pbar },
    ],
  };
}

export function comparisonHtml(outcome: SelectionOutcome): string {
  if (outcome.kind === 'blocked') {
    return (
      `<div class="panel blocked" data-kw="${outcome.k},${outcome.w}">` +
      `<strong>selection blocked</strong><p>${outcome.explanation}</p>` +
      `<p>max feasible n: <span data-field="max-n">${outcome.maxFeasibleN}</span></p></div>`
    );
  }
  const rows = outcome.rows
    .map(
      (r) =>
        `<tr><td>${r.label}</td><td data-design="pcc">${r.pcc}</td>` +
        `<td data-design="srs">${r.srs}</td></tr>`,
    )
    .join('');
  return (
    `<div class="panel comparison" data-kw="${outcome.k},${outcome.w}">` +
    `<table><thead><tr><th></th><th>selected design</th><th>SRS</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p>confidence-region shrink factor: <span data-field="det-ratio">${outcome.detRatio}</span></p>` +
    `<p>prevalence ratio: <span data-field="prev-ratio">${outcome.prevalenceRatio}</span></p>` +
    `<p>max feasible n: <span data-field="max-n">${outcome.maxFeasibleN}</span></p></div>`
  );
}
