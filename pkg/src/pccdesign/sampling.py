"""Simple random sampling and score-stratified (PCC) sampling.

A PCC design is a pair ``(cutoff_k, weight_w)``: a sample of size n takes
``round(n * w)`` subjects uniformly from the stratum with scores strictly
above ``k`` and the remainder from the complementary stratum.  Sampling
depends on scores only, never on labels, which is what makes resulting
samples valid for downstream model fitting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datagen import Cohort
from .rng import substream

__all__ = [
    "DesignConfig",
    "Sample",
    "InfeasibleDesignError",
    "srs_sample",
    "pcc_sample",
    "inclusion_weight",
    "max_feasible_n",
    "high_stratum_count",
    "save_sample_json",
    "load_sample_json",
]


class InfeasibleDesignError(ValueError):
    """Requested sample size exceeds what a stratum can supply."""

    def __init__(self, message: str, stratum: str, available: int, requested: int):
        super().__init__(message)
        self.stratum = stratum
        self.available = available
        self.requested = requested


@dataclass(frozen=True)
class DesignConfig:
    """PCC configuration: score cut-off and high-stratum sample weight."""

    cutoff_k: float
    weight_w: float

    def __post_init__(self):
        if not np.isfinite(self.cutoff_k):
            raise ValueError("cutoff_k must be finite")
        if not 0.0 <= self.weight_w <= 1.0:
            raise ValueError("weight_w must lie in [0, 1]")


@dataclass(frozen=True)
class Sample:
    """Row indices drawn from a cohort under a named design."""

    indices: np.ndarray
    design: str  # "SRS" or "PCC"
    n: int
    config: DesignConfig | None = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if idx.shape[0] != self.n:
            raise ValueError("index count disagrees with n")
        if len(np.unique(idx)) != idx.shape[0]:
            raise ValueError("sample indices must be unique")


def _scores_of(cohort) -> np.ndarray:
    if isinstance(cohort, Cohort):
        return cohort.scores
    return np.asarray(cohort, dtype=float)


def round_half_up(x: float) -> int:
    """round() with .5 always going up, for reproducible stratum splits."""
    return int(math.floor(x + 0.5))


def high_stratum_count(cohort, config: DesignConfig) -> int:
    """Number of cohort rows with scores strictly above the cut-off."""
    return int(np.count_nonzero(_scores_of(cohort) > config.cutoff_k))


def _row_uniforms(N: int, seed: int) -> np.ndarray:
    """One uniform per row from a counter-based stream.

    Both samplers rank these uniforms (overall for SRS, within strata for
    PCC), so same-seed draws of the two designs are coupled: paired
    comparisons see far less Monte Carlo noise, and results do not depend
    on evaluation order or thread count.
    """
    return substream(seed, 2).random(N)


def _smallest(u: np.ndarray, m: int) -> np.ndarray:
    if m == 0:
        return np.empty(0, dtype=np.int64)
    if m >= u.shape[0]:
        return np.arange(u.shape[0], dtype=np.int64)
    return np.argpartition(u, m - 1)[:m]


def srs_sample(cohort, n: int, seed: int) -> Sample:
    """Uniform sample of ``n`` rows without replacement."""
    scores = _scores_of(cohort)
    N = scores.shape[0]
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > N:
        raise ValueError(f"cannot draw {n} from a cohort of {N}")
    u = _row_uniforms(N, seed)
    return Sample(indices=np.sort(_smallest(u, n)), design="SRS", n=n)


def pcc_sample(cohort, config: DesignConfig, n: int, seed: int) -> Sample:
    """Stratified sample: ``round(n*w)`` rows with score > k, rest from below.

    Raises :class:`InfeasibleDesignError` naming the limiting stratum when
    a stratum cannot supply its share; there is no silent capping.
    """
    scores = _scores_of(cohort)
    if n < 0:
        raise ValueError("n must be >= 0")
    hi = np.flatnonzero(scores > config.cutoff_k)
    lo = np.flatnonzero(scores <= config.cutoff_k)
    n_hi = round_half_up(n * config.weight_w)
    n_lo = n - n_hi
    if n_hi > hi.shape[0]:
        raise InfeasibleDesignError(
            f"high stratum (score > {config.cutoff_k:g}) has {hi.shape[0]} subjects "
            f"but the design requires {n_hi}",
            stratum="high",
            available=hi.shape[0],
            requested=n_hi,
        )
    if n_lo > lo.shape[0]:
        raise InfeasibleDesignError(
            f"low stratum (score <= {config.cutoff_k:g}) has {lo.shape[0]} subjects "
            f"but the design requires {n_lo}",
            stratum="low",
            available=lo.shape[0],
            requested=n_lo,
        )
    u = _row_uniforms(scores.shape[0], seed)
    idx = np.concatenate([hi[_smallest(u[hi], n_hi)], lo[_smallest(u[lo], n_lo)]])
    return Sample(indices=np.sort(idx), design="PCC", n=n, config=config)


def inclusion_weight(
    score: float, config: DesignConfig, stratum_fraction: float, base_rate: float
) -> float:
    """Per-subject inclusion probability of PCC relative to a base rate.

    ``stratum_fraction`` is the cohort fraction with scores above the
    cut-off.  When ``weight_w`` equals it, every subject's weight reduces
    to ``base_rate`` and PCC sampling is distributionally equivalent to
    simple random sampling.
    """
    if not 0.0 < stratum_fraction < 1.0:
        raise ValueError("stratum_fraction must lie strictly inside (0, 1)")
    if score > config.cutoff_k:
        return base_rate * config.weight_w / stratum_fraction
    return base_rate * (1.0 - config.weight_w) / (1.0 - stratum_fraction)


def max_feasible_n(cohort, config: DesignConfig) -> int:
    """Largest sample size the strata can supply under this design.

    ``min(floor(n_high / w), floor(n_low / (1 - w)))``, where a zero
    weight removes that stratum's constraint.
    """
    scores = _scores_of(cohort)
    n_hi = int(np.count_nonzero(scores > config.cutoff_k))
    n_lo = scores.shape[0] - n_hi
    w = config.weight_w
    bounds = []
    if w > 0.0:
        bounds.append(math.floor(n_hi / w))
    if w < 1.0:
        bounds.append(math.floor(n_lo / (1.0 - w)))
    return int(min(bounds))


def save_sample_json(sample: Sample, path: str | Path) -> None:
    payload = {
        "design": sample.design,
        "k": None if sample.config is None else sample.config.cutoff_k,
        "w": None if sample.config is None else sample.config.weight_w,
        "n": sample.n,
        "indices": sample.indices.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_sample_json(path: str | Path) -> Sample:
    with open(path) as fh:
        payload = json.load(fh)
    config = None
    if payload["design"] == "PCC":
        config = DesignConfig(payload["k"], payload["w"])
    return Sample(
        indices=np.array(payload["indices"], dtype=np.int64),
        design=payload["design"],
        n=payload["n"],
        config=config,
    )
