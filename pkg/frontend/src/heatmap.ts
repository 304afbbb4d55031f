/** Render models for the paired information-surface heatmaps.
 *
 * Surfaces are drawn as discrete grid cells so every on-screen number is
 * a value from the service payload, auditable against exports; there is
 * no client-side interpolation or smoothing.
 */

import type { SurfacePayload } from './types';

export interface HeatmapCell {
  ki: number;
  wi: number;
  k: number;
  w: number;
  /** exactly the payload value; null when infeasible */
  value: number | null;
  stderr: number | null;
  feasible: boolean;
  /** 0..1 position inside the color ramp; null when infeasible */
  colorT: number | null;
  tooltip: string;
}

export interface ColorScale {
  min: number;
  max: number;
}

export interface SrsCurvePoint {
  ki: number;
  k: number;
  /** equivalent stratum weight: cohort share of scores above k */
  w: number;
}

export interface HeatmapModel {
  criterion: SurfacePayload['criterion'];
  cells: HeatmapCell[];
  colorScale: ColorScale;
  srsCurve: SrsCurvePoint[];
  srsReference: number;
  kGrid: number[];
  wGrid: number[];
}

export function buildHeatmapModel(surface: SurfacePayload): HeatmapModel {
  const feasibleValues: number[] = [];
  for (let ki = 0; ki < surface.k_grid.length; ki += 1) {
    for (let wi = 0; wi < surface.w_grid.length; wi += 1) {
      const v = surface.values[ki][wi];
      if (surface.feasible[ki][wi] && v !== null) feasibleValues.push(v);
    }
  }
  if (feasibleValues.length === 0) {
    throw new Error('surface has no feasible cells to render');
  }
  const min = Math.min(...feasibleValues);
  const max = Math.max(...feasibleValues);
  const span = max - min;

  const cells: HeatmapCell[] = [];
  for (let ki = 0; ki < surface.k_grid.length; ki += 1) {
    for (let wi = 0; wi < surface.w_grid.length; wi += 1) {
      const feasible = surface.feasible[ki][wi];
      const value = surface.values[ki][wi];
      const stderr = surface.stderr[ki][wi];
      const k = surface.k_grid[ki];
      const w = surface.w_grid[wi];
      cells.push({
        ki,
        wi,
        k,
        w,
        value: feasible ? value : null,
        stderr: feasible ? stderr : null,
        feasible,
        colorT:
          feasible && value !== null
            ? span > 0
              ? (value - min) / span
              : 0.5
            : null,
        tooltip: feasible
          ? `k=${k}, w=${w}: ${value}`
          : `k=${k}, w=${w}: infeasible`,
      });
    }
  }

  const srsCurve: SrsCurvePoint[] =
    surface.stratum_fractions === null
      ? []
      : surface.stratum_fractions.map((f, ki) => ({
          ki,
          k: surface.k_grid[ki],
          w: f,
        }));

  return {
    criterion: surface.criterion,
    cells,
    colorScale: { min, max },
    srsCurve,
    srsReference: surface.srs_reference,
    kGrid: surface.k_grid,
    wGrid: surface.w_grid,
  };
}

function rampColor(t: number): string {
  // cold blue to warm red through yellow; presentational only
  const stops: [number, [number, number, number]][] = [
    [0.0, [42, 60, 142]],
    [0.5, [245, 213, 71]],
    [1.0, [185, 28, 28]],
  ];
  let lo = stops[0];
  let hi = stops[stops.length - 1];
  for (let i = 0; i + 1 < stops.length; i += 1) {
    if (t >= stops[i][0] && t <= stops[i + 1][0]) {
      lo = stops[i];
      hi = stops[i + 1];
      break;
    }
  }
  const u = hi[0] === lo[0] ? 0 : (t - lo[0]) / (hi[0] - lo[0]);
  const c = lo[1].map((a, i) => Math.round(a + u * (hi[1][i] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export interface SvgOptions {
  width?: number;
  height?: number;
  title?: string;
}

/** Render one heatmap as a standalone SVG string (k on x, w on y). */
export function heatmapSvg(model: HeatmapModel, opts: SvgOptions = {}): string {
  const width = opts.width ?? 420;
  const height = opts.height ?? 360;
  const margin = { left: 50, right: 12, top: 28, bottom: 36 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const nk = model.kGrid.length;
  const nw = model.wGrid.length;
  const cw = plotW / nk;
  const ch = plotH / nw;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" data-criterion="${model.criterion}">`,
  );
  parts.push(
    '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" ' +
      'patternTransform="rotate(45)"><rect width="6" height="6" fill="#e5e5e5"/>' +
      '<line x1="0" y1="0" x2="0" y2="6" stroke="#9ca3af" stroke-width="2"/></pattern></defs>',
  );
  if (opts.title) {
    parts.push(
      `<text x="${margin.left}" y="16" font-size="13" font-family="sans-serif">${opts.title}</text>`,
    );
  }
  for (const cell of model.cells) {
    const x = margin.left + cell.ki * cw;
    // w axis points up
    const y = margin.top + plotH - (cell.wi + 1) * ch;
    const fill =
      cell.colorT === null ? 'url(#hatch)' : rampColor(cell.colorT);
    parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${cw.toFixed(2)}" ` +
        `height="${ch.toFixed(2)}" fill="${fill}" data-ki="${cell.ki}" data-wi="${cell.wi}" ` +
        `data-value="${cell.value === null ? '' : String(cell.value)}">` +
        `<title>${cell.tooltip}</title></rect>`,
    );
  }
  if (model.srsCurve.length > 0) {
    const pts = model.srsCurve
      .map((p) => {
        const x = margin.left + (p.ki + 0.5) * cw;
        const y = margin.top + plotH - p.w * plotH;
        return `${x.toFixed(2)},${y.toFixed(2)}`;
      })
      .join(' ');
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="#111" stroke-width="1.5" ` +
        'stroke-dasharray="5,3" data-role="srs-curve"/>',
    );
  }
  const kFirst = model.kGrid[0];
  const kLast = model.kGrid[nk - 1];
  parts.push(
    `<text x="${margin.left}" y="${height - 8}" font-size="11" font-family="sans-serif">k=${kFirst}</text>`,
    `<text x="${margin.left + plotW - 40}" y="${height - 8}" font-size="11" font-family="sans-serif">k=${kLast}</text>`,
    `<text x="8" y="${margin.top + 10}" font-size="11" font-family="sans-serif">w=${model.wGrid[nw - 1]}</text>`,
    `<text x="8" y="${margin.top + plotH}" font-size="11" font-family="sans-serif">w=${model.wGrid[0]}</text>`,
  );
  parts.push('</svg>');
  return parts.join('');
}

/** Side-by-side D-optimality and entropy panels. */
export function surfacePairSvg(
  dOpt: HeatmapModel,
  binEnt: HeatmapModel,
  opts: SvgOptions = {},
): string {
  const w = opts.width ?? 420;
  const h = opts.height ?? 360;
  const left = heatmapSvg(dOpt, { width: w, height: h, title: 'D-optimality (log det)' });
  const right = heatmapSvg(binEnt, { width: w, height: h, title: 'Binary entropy' });
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${2 * w + 16}" height="${h}">` +
    `<g>${left.replace('<svg xmlns="http://www.w3.org/2000/svg"', '<svg')}</g>` +
    `<g transform="translate(${w + 16},0)">${right.replace('<svg xmlns="http://www.w3.org/2000/svg"', '<svg')}</g>` +
    '</svg>'
  );
}
