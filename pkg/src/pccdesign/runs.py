"""Run logic shared by the CLI and the HTTP service.

Every batch command and every service job kind resolves to one function
here that maps a validated config to plain JSON-ready dictionaries.
Keeping a single computation and serialization path is what guarantees
that a service job and a CLI run with the same config and seed produce
identical numbers.
"""

from __future__ import annotations

import numpy as np

from .configs import (
    CompareRunConfig,
    GenCohortRunConfig,
    PowerRunConfig,
    RevisionRunConfig,
    RobustnessRunConfig,
    SurfaceRunConfig,
)
from .datagen import generate_outcomes
from .experiments import run_power_experiment, run_revision_experiment
from .information import compare_designs, phi_b, phi_d, predicted_probs
from .rng import spawn_seed
from .sampling import DesignConfig, max_feasible_n, pcc_sample, srs_sample
from .surface import estimate_surface_pair, surface_to_dict

__all__ = [
    "run_surface",
    "run_power",
    "run_revision",
    "run_robustness",
    "run_compare",
    "run_gen_cohort",
]


def run_surface(cfg: SurfaceRunConfig, progress=None) -> dict:
    cohort = cfg.cohort.build(cfg.seed)
    grid = cfg.grid.build(cohort.scores, cfg.seed)
    d_opt, bin_ent = estimate_surface_pair(
        cohort, grid, cfg.assumed.build(), n_jobs=cfg.n_jobs, progress=progress
    )
    return {"d_opt": surface_to_dict(d_opt), "bin_ent": surface_to_dict(bin_ent)}


def run_power(cfg: PowerRunConfig, progress=None) -> dict:
    cells = cfg.scenarios()
    results = []
    total = len(cells)
    for i, (a0, a1, dspec, scenario) in enumerate(cells):
        def cell_progress(f, _i=i):
            if progress is not None:
                progress((_i + f) / total)

        curve = run_power_experiment(
            scenario, alpha=cfg.alpha_level, n_jobs=cfg.n_jobs, progress=cell_progress
        )
        results.append(
            {
                "alpha0": a0,
                "alpha1": a1,
                "design": dspec.name,
                "rows": [
                    {
                        "test": test,
                        "n": n,
                        "power": power,
                        "stderr": stderr,
                        "dropped": dropped,
                    }
                    for test, n, power, stderr, dropped in curve.rows()
                ],
                "unreliable": curve.unreliable,
            }
        )
    return {
        "alpha_level": cfg.alpha_level,
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "curves": results,
        "unreliable": any(r["unreliable"] for r in results),
    }


def run_revision(cfg: RevisionRunConfig, progress=None) -> dict:
    lam = None if cfg.lambda_values is None else np.asarray(cfg.lambda_values, float)
    out = []
    cells = cfg.scenarios()
    total = len(cells)
    for i, (dspec, scenario) in enumerate(cells):
        def cell_progress(f, _i=i):
            if progress is not None:
                progress((_i + f) / total)

        res = run_revision_experiment(
            scenario,
            lambda_grid=lam,
            n_lambdas=cfg.n_lambdas,
            n_jobs=cfg.n_jobs,
            progress=cell_progress,
        )
        out.append(
            {
                "design": dspec.name,
                "sample_sizes": list(res.sample_sizes),
                "curves": {
                    str(n): {
                        "lambdas": res.lambda_grids[n].tolist(),
                        "fdr": res.fdr[n].tolist(),
                        "fer": res.fer[n].tolist(),
                        "mean_prevalence": res.mean_prevalence[n],
                        "mean_entropy": res.mean_entropy[n],
                        "dropped": res.dropped[n],
                    }
                    for n in res.sample_sizes
                },
                "unreliable": res.unreliable,
            }
        )
    return {
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "designs": out,
        "unreliable": any(d["unreliable"] for d in out),
    }


def run_robustness(cfg: RobustnessRunConfig, progress=None) -> dict:
    cohort = cfg.cohort.build(cfg.seed)
    grid = cfg.grid.build(cohort.scores, cfg.seed)
    total = len(cfg.assumed_list)
    surfaces = []
    for i, assumed_cfg in enumerate(cfg.assumed_list):
        def cell_progress(f, _i=i):
            if progress is not None:
                progress((_i + f) / total)

        d_opt, bin_ent = estimate_surface_pair(
            cohort, grid, assumed_cfg.build(), n_jobs=cfg.n_jobs, progress=cell_progress
        )
        surfaces.append(
            {
                "assumed": assumed_cfg.model_dump(),
                "d_opt": surface_to_dict(d_opt),
                "bin_ent": surface_to_dict(bin_ent),
            }
        )
    return {"seed": cfg.seed, "surfaces": surfaces}


def run_compare(cfg: CompareRunConfig, progress=None) -> dict:
    """Monte Carlo comparison of one PCC cell against the SRS reference."""
    cohort = cfg.cohort.build(cfg.seed)
    scores = cohort.scores
    config = DesignConfig(cfg.k, cfg.w)
    assumed = cfg.assumed.build()
    feasible_n = max_feasible_n(scores, config)
    stratum_fraction = float((scores > cfg.k).mean())
    result = {
        "k": cfg.k,
        "w": cfg.w,
        "n": cfg.n,
        "B": cfg.B,
        "seed": cfg.seed,
        "max_feasible_n": feasible_n,
        "stratum_fraction": stratum_fraction,
        "feasible": feasible_n >= cfg.n,
    }
    if not result["feasible"]:
        return result

    def stats(draw):
        phid = np.empty(cfg.B)
        pbar = np.empty(cfg.B)
        ent = np.empty(cfg.B)
        for b in range(cfg.B):
            idx = draw(b)
            s = scores[idx]
            f = None if cohort.features is None else cohort.features[idx]
            probs = predicted_probs(s, f, assumed)
            phid[b] = phi_d(s, probs)
            pbar[b] = probs.mean()
            ent[b] = phi_b(probs)
            if progress is not None:
                progress((b + 1) / (2 * cfg.B))
        return phid, pbar, ent

    # both designs read the same per-replicate uniform stream, so the
    # comparison is paired and the ratio estimates are low-variance
    def pcc_draw(b):
        return pcc_sample(scores, config, cfg.n, spawn_seed(cfg.seed, 7, b)).indices

    def srs_draw(b):
        return srs_sample(scores, cfg.n, spawn_seed(cfg.seed, 7, b)).indices

    phid_p, pbar_p, ent_p = stats(pcc_draw)
    phid_s, pbar_s, ent_s = stats(srs_draw)
    report = compare_designs(
        float(phid_p.mean()), float(phid_s.mean()),
        float(pbar_p.mean()), float(pbar_s.mean()),
    )
    result.update(
        {
            "pcc": {
                "phi_d": float(phid_p.mean()),
                "phi_d_stderr": float(phid_p.std(ddof=1) / np.sqrt(cfg.B)),
                "phi_b": float(ent_p.mean()),
                "pbar": float(pbar_p.mean()),
            },
            "srs": {
                "phi_d": float(phid_s.mean()),
                "phi_d_stderr": float(phid_s.std(ddof=1) / np.sqrt(cfg.B)),
                "phi_b": float(ent_s.mean()),
                "pbar": float(pbar_s.mean()),
            },
            "det_ratio": report.det_ratio,
            "prevalence_ratio": report.prevalence_ratio,
        }
    )
    return result


def run_gen_cohort(cfg: GenCohortRunConfig):
    """Build the configured cohort, optionally drawing outcomes; returns
    (cohort, summary dict)."""
    cohort = cfg.cohort.build(cfg.seed)
    if cfg.outcomes is not None:
        cohort.labels = generate_outcomes(
            cohort, cfg.outcomes.build(), spawn_seed(cfg.seed, 6)
        )
    qs = [0.02, 0.25, 0.5, 0.75, 0.98]
    summary = {
        "n": cohort.n,
        "p": cohort.p,
        "score_quantiles": {str(q): float(np.quantile(cohort.scores, q)) for q in qs},
        "prevalence": None if cohort.labels is None else float(cohort.labels.mean()),
    }
    return cohort, summary
