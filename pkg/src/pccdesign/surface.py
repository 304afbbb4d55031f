"""Monte Carlo information response surfaces over a (k, w) design grid.

For every feasible grid cell, B stratified samples are drawn and an
information criterion is averaged over them; a simple-random-sampling
reference value is estimated the same way.  Cell work units are seeded
individually from the master seed, so surfaces are identical no matter
how the grid is scheduled or parallelized.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .datagen import Cohort, ModificationParams, NULL_MODIFICATION
from .information import phi_b, phi_d, predicted_probs
from .rng import substream
from .sampling import DesignConfig, InfeasibleDesignError, max_feasible_n

__all__ = [
    "GridSpec",
    "InfoSurface",
    "D_OPT",
    "BIN_ENT",
    "default_grid",
    "estimate_surface",
    "estimate_surface_pair",
    "surface_argmax",
    "surface_to_dict",
    "surface_from_dict",
    "save_surface_json",
    "save_surface_csv",
]

D_OPT = "D_OPT"
BIN_ENT = "BIN_ENT"


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: cut-offs, weights, per-draw sample size, replicates."""

    k_grid: np.ndarray
    w_grid: np.ndarray
    n: int
    B: int
    seed: int

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=float)
        w = np.asarray(self.w_grid, dtype=float)
        object.__setattr__(self, "k_grid", k)
        object.__setattr__(self, "w_grid", w)
        if k.size == 0 or w.size == 0:
            raise ValueError("grids must be nonempty")
        if np.any(np.diff(k) < 0) or np.any(np.diff(w) < 0):
            raise ValueError("grids must be sorted ascending")
        if np.any((w < 0) | (w > 1)):
            raise ValueError("w grid must lie in [0, 1]")
        if self.n < 2:
            raise ValueError("per-draw sample size must be >= 2")
        if self.B < 1:
            raise ValueError("replicates must be >= 1")


def default_grid(scores: np.ndarray, n: int = 100, B: int = 200, seed: int = 0,
                 n_k: int = 25, n_w: int = 25) -> GridSpec:
    """25x25 grid: k at equally spaced score quantiles (2nd..98th pctile), w in [0.02, 0.98]."""
    s = np.asarray(scores, dtype=float)
    qs = np.linspace(0.02, 0.98, n_k)
    k_grid = np.unique(np.quantile(s, qs))
    w_grid = np.linspace(0.02, 0.98, n_w)
    return GridSpec(k_grid=k_grid, w_grid=w_grid, n=n, B=B, seed=seed)


@dataclass
class InfoSurface:
    """Monte Carlo mean information over the grid, with stderr and feasibility."""

    criterion: str
    k_grid: np.ndarray
    w_grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    feasible: np.ndarray
    srs_reference: float
    srs_stderr: float
    assumed: ModificationParams = field(default_factory=lambda: NULL_MODIFICATION)
    n: int = 0
    B: int = 0
    seed: int = 0
    stratum_fractions: np.ndarray | None = None  # P(S > k) per grid cut-off


def _smallest(u: np.ndarray, m: int) -> np.ndarray:
    if m == 0:
        return np.empty(0, dtype=np.int64)
    if m >= u.shape[0]:
        return np.arange(u.shape[0], dtype=np.int64)
    return np.argpartition(u, m - 1)[:m]


def _criterion_values(scores, feats, assumed, criteria):
    probs = predicted_probs(scores, feats, assumed)
    out = []
    for crit in criteria:
        out.append(phi_d(scores, probs) if crit == D_OPT else phi_b(probs))
    return out


def estimate_surface_pair(
    cohort,
    grid: GridSpec,
    assumed: ModificationParams | None = None,
    n_jobs: int = 1,
    progress=None,
) -> tuple[InfoSurface, InfoSurface]:
    """Estimate the D-optimality and binary-entropy surfaces on shared draws.

    Each (k, w) cell averages both criteria over the same B samples of
    size ``grid.n``; cells whose strata cannot supply ``grid.n`` are
    masked infeasible and carry NaN.  Replicate uniforms are keyed by
    (master seed, replicate) only, so results do not depend on ``n_jobs``
    or on the order in which cells are evaluated.

    Returns the (D_OPT, BIN_ENT) surface pair.
    """
    assumed = assumed or NULL_MODIFICATION
    scores = cohort.scores if isinstance(cohort, Cohort) else np.asarray(cohort, float)
    feats = cohort.features if isinstance(cohort, Cohort) else None
    if assumed.gamma is not None and np.any(assumed.gamma) and feats is None:
        raise ValueError("assumed parameters with nonzero gamma require features")
    if grid.k_grid.min() < scores.min() or grid.k_grid.max() > scores.max():
        raise ValueError("k grid must lie within the observed score support")
    N = scores.shape[0]
    if grid.n > N:
        raise ValueError("per-draw sample size exceeds cohort size")

    nk, nw = grid.k_grid.size, grid.w_grid.size
    shape = (nk, nw)
    values = {c: np.full(shape, np.nan) for c in (D_OPT, BIN_ENT)}
    stderr = {c: np.full(shape, np.nan) for c in (D_OPT, BIN_ENT)}
    feasible = np.zeros(shape, dtype=bool)

    strata = {}
    fractions = np.empty(nk)
    for ki, k in enumerate(grid.k_grid):
        hi = np.flatnonzero(scores > k)
        strata[ki] = (hi, np.flatnonzero(scores <= k))
        fractions[ki] = hi.shape[0] / N

    # One uniform vector per replicate, shared by every cell and the SRS
    # reference: draws are rank-based (smallest uniforms win), so designs
    # are coupled within a replicate.  Cell estimates stay unbiased and
    # order/parallelism independent, while design contrasts lose most of
    # their Monte Carlo noise.
    max_cache = 20_000_000
    if grid.B * N <= max_cache:
        uniforms = np.stack([substream(grid.seed, 9, b).random(N) for b in range(grid.B)])

        def u_for(b):
            return uniforms[b]
    else:
        def u_for(b):
            return substream(grid.seed, 9, b).random(N)

    def run_cell(cell):
        ki, wi = cell
        k = float(grid.k_grid[ki])
        w = float(grid.w_grid[wi])
        config = DesignConfig(k, w)
        if max_feasible_n(scores, config) < grid.n:
            return ki, wi, None
        hi, lo = strata[ki]
        n_hi = int(np.floor(grid.n * w + 0.5))
        n_lo = grid.n - n_hi
        if n_hi > hi.shape[0] or n_lo > lo.shape[0]:
            return ki, wi, None
        vals = np.empty((grid.B, 2))
        for b in range(grid.B):
            u = u_for(b)
            idx = np.concatenate([hi[_smallest(u[hi], n_hi)], lo[_smallest(u[lo], n_lo)]])
            s = scores[idx]
            f = None if feats is None else feats[idx]
            vals[b] = _criterion_values(s, f, assumed, (D_OPT, BIN_ENT))
        return ki, wi, vals

    cells = [(ki, wi) for ki in range(nk) for wi in range(nw)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = []
            for i, out in enumerate(pool.map(run_cell, cells)):
                results.append(out)
                if progress is not None:
                    progress((i + 1) / len(cells))
    else:
        results = []
        for i, c in enumerate(cells):
            results.append(run_cell(c))
            if progress is not None:
                progress((i + 1) / len(cells))

    any_feasible = False
    for ki, wi, vals in results:
        if vals is None:
            continue
        any_feasible = True
        feasible[ki, wi] = True
        for ci, crit in enumerate((D_OPT, BIN_ENT)):
            col = vals[:, ci]
            values[crit][ki, wi] = col.mean()
            stderr[crit][ki, wi] = (
                col.std(ddof=1) / np.sqrt(grid.B) if grid.B > 1 else 0.0
            )
    if not any_feasible:
        raise InfeasibleDesignError(
            f"no grid cell can supply samples of size {grid.n}",
            stratum="all", available=0, requested=grid.n,
        )

    # SRS reference from the same replicate uniforms
    srs_vals = np.empty((grid.B, 2))
    for b in range(grid.B):
        idx = _smallest(u_for(b), grid.n)
        s = scores[idx]
        f = None if feats is None else feats[idx]
        srs_vals[b] = _criterion_values(s, f, assumed, (D_OPT, BIN_ENT))

    out = []
    for ci, crit in enumerate((D_OPT, BIN_ENT)):
        col = srs_vals[:, ci]
        out.append(
            InfoSurface(
                criterion=crit,
                k_grid=grid.k_grid.copy(),
                w_grid=grid.w_grid.copy(),
                values=values[crit],
                stderr=stderr[crit],
                feasible=feasible.copy(),
                srs_reference=float(col.mean()),
                srs_stderr=float(col.std(ddof=1) / np.sqrt(grid.B)) if grid.B > 1 else 0.0,
                assumed=assumed,
                n=grid.n,
                B=grid.B,
                seed=grid.seed,
                stratum_fractions=fractions.copy(),
            )
        )
    return out[0], out[1]


def estimate_surface(
    cohort,
    grid: GridSpec,
    criterion: str = D_OPT,
    assumed: ModificationParams | None = None,
    n_jobs: int = 1,
) -> InfoSurface:
    """Estimate a single-criterion surface (same draws as the pair version)."""
    if criterion not in (D_OPT, BIN_ENT):
        raise ValueError(f"unknown criterion {criterion!r}")
    pair = estimate_surface_pair(cohort, grid, assumed, n_jobs=n_jobs)
    return pair[0] if criterion == D_OPT else pair[1]


def surface_argmax(surface: InfoSurface) -> tuple[float, float, float]:
    """Best feasible cell as ``(k, w, value)``.

    Ties prefer the weight closest to 0.5, then the smaller cut-off.
    """
    if not surface.feasible.any():
        raise ValueError("surface has no feasible cells")
    best = None
    for ki, k in enumerate(surface.k_grid):
        for wi, w in enumerate(surface.w_grid):
            if not surface.feasible[ki, wi]:
                continue
            v = surface.values[ki, wi]
            key = (-v, abs(w - 0.5), k)
            if best is None or key < best[0]:
                best = (key, (float(k), float(w), float(v)))
    return best[1]


def surface_to_dict(surface: InfoSurface) -> dict:
    def clean(m):
        return [[None if not np.isfinite(v) else v for v in row] for row in m.tolist()]

    assumed = surface.assumed
    return {
        "criterion": surface.criterion,
        "assumed": {
            "alpha0": assumed.alpha0,
            "alpha1": assumed.alpha1,
            "gamma": None if assumed.gamma is None else assumed.gamma.tolist(),
        },
        "k_grid": surface.k_grid.tolist(),
        "w_grid": surface.w_grid.tolist(),
        "values": clean(surface.values),
        "stderr": clean(surface.stderr),
        "feasible": surface.feasible.tolist(),
        "srs_reference": surface.srs_reference,
        "srs_stderr": surface.srs_stderr,
        "n": surface.n,
        "B": surface.B,
        "seed": surface.seed,
        "stratum_fractions": (
            None
            if surface.stratum_fractions is None
            else surface.stratum_fractions.tolist()
        ),
    }


def surface_from_dict(payload: dict) -> InfoSurface:
    def arr(m):
        return np.array(
            [[np.nan if v is None else v for v in row] for row in m], dtype=float
        )

    a = payload["assumed"]
    assumed = ModificationParams(
        a["alpha0"], a["alpha1"], None if a["gamma"] is None else np.array(a["gamma"])
    )
    return InfoSurface(
        criterion=payload["criterion"],
        k_grid=np.array(payload["k_grid"], dtype=float),
        w_grid=np.array(payload["w_grid"], dtype=float),
        values=arr(payload["values"]),
        stderr=arr(payload["stderr"]),
        feasible=np.array(payload["feasible"], dtype=bool),
        srs_reference=payload["srs_reference"],
        srs_stderr=payload.get("srs_stderr", 0.0),
        assumed=assumed,
        n=payload.get("n", 0),
        B=payload.get("B", 0),
        seed=payload.get("seed", 0),
        stratum_fractions=(
            None
            if payload.get("stratum_fractions") is None
            else np.array(payload["stratum_fractions"], dtype=float)
        ),
    )


def save_surface_json(surface: InfoSurface, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(surface_to_dict(surface), fh, sort_keys=True)


def save_surface_csv(surface: InfoSurface, path: str | Path) -> None:
    """Long-format export: one row per (k, w) cell."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "w", "value", "stderr", "feasible"])
        for ki, k in enumerate(surface.k_grid):
            for wi, w in enumerate(surface.w_grid):
                feas = bool(surface.feasible[ki, wi])
                v = surface.values[ki, wi]
                se = surface.stderr[ki, wi]
                writer.writerow([
                    format(float(k), ".17g"),
                    format(float(w), ".17g"),
                    format(float(v), ".17g") if feas else "",
                    format(float(se), ".17g") if feas else "",
                    int(feas),
                ])
