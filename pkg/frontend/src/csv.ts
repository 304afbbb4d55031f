/** CSV exports of service payloads (no recomputation, values pass
 * through verbatim). */

import type { PowerResult, SurfacePayload } from './types';

export function surfaceToCsv(surface: SurfacePayload): string {
  const lines = ['k,w,value,stderr,feasible'];
  for (let ki = 0; ki < surface.k_grid.length; ki += 1) {
    for (let wi = 0; wi < surface.w_grid.length; wi += 1) {
      const feas = surface.feasible[ki][wi];
      const v = surface.values[ki][wi];
      const se = surface.stderr[ki][wi];
      lines.push(
        [
          String(surface.k_grid[ki]),
          String(surface.w_grid[wi]),
          feas && v !== null ? String(v) : '',
          feas && se !== null ? String(se) : '',
          feas ? '1' : '0',
        ].join(','),
      );
    }
  }
  return lines.join('\n') + '\n';
}

export function powerToCsv(result: PowerResult): string {
  const lines = ['design,alpha0,alpha1,test,n,power,stderr,dropped'];
  for (const block of result.curves) {
    for (const row of block.rows) {
      lines.push(
        [
          block.design,
          String(block.alpha0),
          String(block.alpha1),
          row.test,
          String(row.n),
          String(row.power),
          String(row.stderr),
          String(row.dropped),
        ].join(','),
      );
    }
  }
  return lines.join('\n') + '\n';
}
