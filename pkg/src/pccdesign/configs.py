"""Declarative run configurations shared by the CLI and the HTTP service.

One JSON document fully describes a run (cohort source, design grid or
design list, generating truth, replication, seed).  The same schemas
validate CLI config files and service job requests, which is what makes
service results reproducible against batch runs.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .datagen import Cohort, ModificationParams, generate_lda_cohort, load_cohort_csv, load_cohort_npz
from .experiments import PRESET_FEATURE_SCALE, Scenario, preset_coefficients
from .rng import spawn_seed, substream
from .sampling import DesignConfig
from .surface import GridSpec, default_grid

__all__ = [
    "CohortConfig",
    "AssumedConfig",
    "DesignSpec",
    "GridConfig",
    "SurfaceRunConfig",
    "PowerRunConfig",
    "RevisionRunConfig",
    "RobustnessRunConfig",
    "GenCohortRunConfig",
    "CompareRunConfig",
    "register_uploaded_cohort",
    "UPLOAD_PREFIX",
]

#: Uploaded cohorts live in memory and are addressed from configs through
#: a reserved path prefix, so job configs stay plain JSON.
UPLOAD_PREFIX = "__uploaded__/"
_UPLOADED: dict[str, Cohort] = {}


def register_uploaded_cohort(cohort_id: str, cohort: Cohort) -> str:
    """Make an in-memory cohort addressable as a config 'file' path."""
    _UPLOADED[cohort_id] = cohort
    return UPLOAD_PREFIX + cohort_id


class CohortConfig(BaseModel):
    """Where scores (and optionally features) come from.

    ``lda``: synthetic class-conditional Gaussian cohort.
    ``normal_scores``: score-only cohort with Normal(mean, sd) scores.
    ``file``: load a cohort CSV/NPZ produced by this package.
    """

    kind: Literal["lda", "normal_scores", "file"]
    n: int = 10_000
    p: int = 100
    prevalence_initial: float = 0.10
    beta: Optional[list[float]] = None  # None selects the bundled preset vector
    feature_scale: float = PRESET_FEATURE_SCALE
    mean: float = -1.5
    sd: float = 1.0
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "file" and not self.path:
            raise ValueError("cohort kind 'file' requires a path")
        if self.kind == "lda" and not 0 < self.prevalence_initial < 1:
            raise ValueError("prevalence_initial must be in (0, 1)")
        return self

    def build(self, seed: int) -> Cohort:
        if self.kind == "file":
            if self.path.startswith(UPLOAD_PREFIX):
                cohort_id = self.path[len(UPLOAD_PREFIX):]
                if cohort_id not in _UPLOADED:
                    raise FileNotFoundError(f"unknown uploaded cohort {cohort_id}")
                return _UPLOADED[cohort_id]
            if self.path.endswith(".npz"):
                return load_cohort_npz(self.path)
            return load_cohort_csv(self.path)
        if self.kind == "normal_scores":
            rng = substream(seed, 4)
            return Cohort(scores=self.mean + self.sd * rng.standard_normal(self.n))
        beta = (
            preset_coefficients(self.p) if self.beta is None else np.asarray(self.beta)
        )
        return generate_lda_cohort(
            self.n,
            self.p,
            self.prevalence_initial,
            beta,
            seed=spawn_seed(seed, 5),
            feature_scale=self.feature_scale,
        )


class AssumedConfig(BaseModel):
    """Assumed modification parameters for information evaluation."""

    alpha0: float = 0.0
    alpha1: float = 1.0
    gamma: Optional[list[float]] = None

    def build(self) -> ModificationParams:
        g = None if self.gamma is None else np.asarray(self.gamma, dtype=float)
        return ModificationParams(self.alpha0, self.alpha1, g)


class DesignSpec(BaseModel):
    kind: Literal["srs", "pcc"]
    k: Optional[float] = None
    w: Optional[float] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "pcc":
            if self.k is None or self.w is None:
                raise ValueError("pcc design requires k and w")
            if not 0 <= self.w <= 1:
                raise ValueError("w must lie in [0, 1]")
        return self

    def build(self) -> DesignConfig | None:
        return None if self.kind == "srs" else DesignConfig(self.k, self.w)

    @property
    def name(self) -> str:
        return "SRS" if self.kind == "srs" else f"PCC(k={self.k:g},w={self.w:g})"


class GridConfig(BaseModel):
    """Evaluation grid; explicit values override the quantile defaults."""

    n_k: int = 25
    n_w: int = 25
    k_values: Optional[list[float]] = None
    w_values: Optional[list[float]] = None
    n: int = Field(default=100, ge=2)
    B: int = Field(default=200, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.w_values is not None:
            w = np.asarray(self.w_values, dtype=float)
            if np.any((w < 0) | (w > 1)):
                raise ValueError("grid.w_values must lie in [0, 1]")
        return self

    def build(self, scores: np.ndarray, seed: int) -> GridSpec:
        base = default_grid(scores, n=self.n, B=self.B, seed=seed, n_k=self.n_k, n_w=self.n_w)
        k = base.k_grid if self.k_values is None else np.asarray(self.k_values, float)
        w = base.w_grid if self.w_values is None else np.asarray(self.w_values, float)
        return GridSpec(k_grid=np.sort(k), w_grid=np.sort(w), n=self.n, B=self.B, seed=seed)


class SurfaceRunConfig(BaseModel):
    cohort: CohortConfig
    grid: GridConfig = GridConfig()
    assumed: AssumedConfig = AssumedConfig()
    seed: int = 0
    n_jobs: int = 1


class PowerRunConfig(BaseModel):
    """Power study over a grid of true recalibration parameters."""

    cohort: CohortConfig
    alpha0_values: list[float] = [0.0]
    alpha1_values: list[float] = [1.0]
    designs: list[DesignSpec] = [DesignSpec(kind="srs"), DesignSpec(kind="pcc", k=-1.0, w=0.5)]
    sample_sizes: list[int] = [150, 350, 750, 1250]
    replicates: int = Field(default=200, ge=1)
    alpha_level: float = 0.05
    seed: int = 0
    n_jobs: int = 1

    def scenarios(self):
        """(alpha0, alpha1, design) -> Scenario for every grid cell."""
        out = []
        for a0 in self.alpha0_values:
            for a1 in self.alpha1_values:
                for d in self.designs:
                    out.append(
                        (
                            a0,
                            a1,
                            d,
                            Scenario(
                                cohort_n=self.cohort.n,
                                cohort_p=self.cohort.p,
                                prevalence_initial=self.cohort.prevalence_initial,
                                beta=(
                                    preset_coefficients(self.cohort.p)
                                    if self.cohort.beta is None
                                    else np.asarray(self.cohort.beta)
                                ),
                                true_params=ModificationParams(a0, a1, None),
                                design=d.build(),
                                sample_sizes=tuple(self.sample_sizes),
                                replicates=self.replicates,
                                seed=self.seed,
                                feature_scale=self.cohort.feature_scale,
                            ),
                        )
                    )
        return out


class GammaSpec(BaseModel):
    """Sparse revision truth: explicit values or effect-size/sparsity shorthand."""

    values: Optional[list[float]] = None
    effect_size: float = 0.6
    sparsity: float = 0.05
    start_index: int = 20  # first feature index carrying signal (0-based)

    def build(self, p: int) -> np.ndarray:
        if self.values is not None:
            g = np.asarray(self.values, dtype=float)
            if g.shape[0] != p:
                raise ValueError(f"gamma values must have length {p}")
            return g
        k = max(int(round(self.sparsity * p)), 1)
        if self.start_index + k > p:
            raise ValueError("gamma support does not fit the feature dimension")
        g = np.zeros(p)
        signs = np.array([1.0 if j % 2 == 0 else -1.0 for j in range(k)])
        g[self.start_index : self.start_index + k] = self.effect_size * signs
        return g


class RevisionRunConfig(BaseModel):
    cohort: CohortConfig
    alpha0: float = -float(np.log(3))
    alpha1: float = 0.9
    gamma: GammaSpec = GammaSpec()
    designs: list[DesignSpec] = [DesignSpec(kind="srs"), DesignSpec(kind="pcc", k=-1.0, w=0.5)]
    sample_sizes: list[int] = [250, 500, 750]
    replicates: int = Field(default=200, ge=1)
    lambda_values: Optional[list[float]] = None  # None selects the auto grid
    n_lambdas: int = 40
    seed: int = 0
    n_jobs: int = 1

    def scenarios(self):
        truth = self.gamma.build(self.cohort.p)
        out = []
        for d in self.designs:
            out.append(
                (
                    d,
                    Scenario(
                        cohort_n=self.cohort.n,
                        cohort_p=self.cohort.p,
                        prevalence_initial=self.cohort.prevalence_initial,
                        beta=(
                            preset_coefficients(self.cohort.p)
                            if self.cohort.beta is None
                            else np.asarray(self.cohort.beta)
                        ),
                        true_params=ModificationParams(self.alpha0, self.alpha1, truth),
                        design=d.build(),
                        sample_sizes=tuple(self.sample_sizes),
                        replicates=self.replicates,
                        seed=self.seed,
                        feature_scale=self.cohort.feature_scale,
                    ),
                )
            )
        return out


class RobustnessRunConfig(BaseModel):
    cohort: CohortConfig
    assumed_list: list[AssumedConfig] = [AssumedConfig()]
    grid: GridConfig = GridConfig()
    seed: int = 0
    n_jobs: int = 1


class GenCohortRunConfig(BaseModel):
    cohort: CohortConfig
    outcomes: Optional[AssumedConfig] = None  # draw labels when given
    seed: int = 0
    format: Literal["csv", "npz", "both"] = "both"


class CompareRunConfig(BaseModel):
    """Single-cell design comparison against the SRS reference."""

    cohort: CohortConfig
    k: float
    w: float
    n: int = Field(default=100, ge=2)
    B: int = Field(default=500, ge=2)
    assumed: AssumedConfig = AssumedConfig()
    seed: int = 0
