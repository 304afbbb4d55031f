"""Synthetic cohort generation for sampling-design studies.

Cohorts are generated with a class-conditional Gaussian (LDA) mechanism:
a latent initial outcome is drawn at a chosen prevalence, features are
drawn around class-dependent means, and the induced logistic model then
holds exactly with the requested coefficient vector.  Scores are the
source-model linear predictor on the log-odds scale; observed outcomes
are drawn from a recalibration + revision model on top of the scores.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, logit

from .rng import substream

__all__ = [
    "SourceModel",
    "ModificationParams",
    "Cohort",
    "generate_lda_cohort",
    "compute_scores",
    "generate_outcomes",
    "save_cohort_csv",
    "load_cohort_csv",
    "save_cohort_npz",
    "load_cohort_npz",
]


@dataclass(frozen=True)
class SourceModel:
    """Original prediction model: intercept plus per-feature log-odds coefficients."""

    intercept: float
    coefficients: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coef)
        if coef.ndim != 1:
            raise ValueError("coefficients must be a 1-d vector")
        if not np.isfinite(self.intercept) or not np.all(np.isfinite(coef)):
            raise ValueError("source model parameters must be finite")

    @property
    def p(self) -> int:
        return self.coefficients.shape[0]

    @classmethod
    def for_lda(cls, coefficients, prevalence_initial: float) -> "SourceModel":
        """Source model whose intercept makes the LDA construction self-consistent.

        With class means ``+/- scale^2 * coefficients / 2`` and isotropic
        covariance, the induced logistic intercept is exactly
        ``logit(prevalence_initial)``.
        """
        if not 0.0 < prevalence_initial < 1.0:
            raise ValueError("prevalence_initial must be in (0, 1)")
        return cls(float(logit(prevalence_initial)), coefficients)


@dataclass(frozen=True)
class ModificationParams:
    """Recalibration intercept/slope and per-feature revision coefficients.

    The null configuration ``(0, 1, 0)`` leaves source-model predictions
    unchanged.
    """

    alpha0: float = 0.0
    alpha1: float = 1.0
    gamma: np.ndarray | None = None

    def __post_init__(self):
        if self.gamma is not None:
            g = np.asarray(self.gamma, dtype=float)
            object.__setattr__(self, "gamma", g)
            if g.ndim != 1:
                raise ValueError("gamma must be a 1-d vector")
            if not np.all(np.isfinite(g)):
                raise ValueError("gamma must be finite")
        if not (np.isfinite(self.alpha0) and np.isfinite(self.alpha1)):
            raise ValueError("alpha0/alpha1 must be finite")

    @property
    def is_null(self) -> bool:
        no_gamma = self.gamma is None or not np.any(self.gamma)
        return self.alpha0 == 0.0 and self.alpha1 == 1.0 and no_gamma

    def gamma_or_zeros(self, p: int) -> np.ndarray:
        if self.gamma is None:
            return np.zeros(p)
        if self.gamma.shape[0] != p:
            raise ValueError(f"gamma has length {self.gamma.shape[0]}, expected {p}")
        return self.gamma


NULL_MODIFICATION = ModificationParams(0.0, 1.0, None)


@dataclass
class Cohort:
    """A population of subjects with scores and optionally features/labels.

    ``scores`` are always present (log-odds scale).  ``features`` may be
    None for score-only cohorts (e.g. uploaded score files); ``labels``
    are None until outcomes are drawn or observed.
    """

    scores: np.ndarray
    features: np.ndarray | None = None
    labels: np.ndarray | None = None
    prevalence_initial: float | None = None
    source: SourceModel | None = None
    modification: ModificationParams | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if self.scores.ndim != 1:
            raise ValueError("scores must be a 1-d vector")
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=float)
            if self.features.shape[0] != self.n:
                raise ValueError("features and scores disagree on cohort size")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int8)
            if self.labels.shape[0] != self.n:
                raise ValueError("labels and scores disagree on cohort size")
            if not np.isin(self.labels, (0, 1)).all():
                raise ValueError("labels must be 0/1")

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    @property
    def p(self) -> int:
        return 0 if self.features is None else self.features.shape[1]


def compute_scores(features: np.ndarray, source: SourceModel) -> np.ndarray:
    """Score each row as ``intercept + features @ coefficients``."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    if X.shape[1] != source.p:
        raise ValueError(
            f"feature width {X.shape[1]} does not match coefficient length {source.p}"
        )
    return source.intercept + X @ source.coefficients


def generate_lda_cohort(
    n: int,
    p: int,
    prevalence_initial: float,
    source: SourceModel | np.ndarray,
    seed: int,
    feature_scale: float = 1.0,
) -> Cohort:
    """Generate a cohort under the class-conditional Gaussian mechanism.

    A latent initial outcome is drawn Bernoulli(``prevalence_initial``);
    features are then Normal with mean ``+/- feature_scale^2 * beta / 2``
    (sign by latent class) and covariance ``feature_scale^2 * I``, which
    induces ``logit P(Y_init=1 | X) = logit(prevalence) + X @ beta``
    exactly.  Scores are filled from the source model; labels are left
    unset (draw them with :func:`generate_outcomes`).

    Parameters
    ----------
    n, p : int
        Cohort size and feature dimension.
    prevalence_initial : float
        Marginal prevalence of the latent initial outcome, in (0, 1).
    source : SourceModel or array_like
        Coefficient vector of length ``p``.  A bare vector is promoted via
        :meth:`SourceModel.for_lda`, which is the self-consistent choice;
        an explicit ``SourceModel`` is used as given.
    seed : int
        Master seed; generation is bit-reproducible.
    feature_scale : float
        Within-class feature standard deviation.  1.0 is the canonical
        unit-variance construction; smaller values produce less separated
        score distributions at the same coefficient vector.
    """
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    if not 0.0 < prevalence_initial < 1.0:
        raise ValueError("prevalence_initial must be in (0, 1)")
    if not np.isfinite(feature_scale) or feature_scale <= 0:
        raise ValueError("feature_scale must be positive and finite")
    if not isinstance(source, SourceModel):
        source = SourceModel.for_lda(source, prevalence_initial)
    if source.p != p:
        raise ValueError(f"source model has {source.p} coefficients, expected {p}")

    rng = substream(seed, 0)
    y_init = rng.random(n) < prevalence_initial
    shift = np.where(y_init, 0.5, -0.5)[:, None] * (
        feature_scale**2 * source.coefficients
    )[None, :]
    X = feature_scale * rng.standard_normal((n, p)) + shift
    scores = compute_scores(X, source)
    return Cohort(
        scores=scores,
        features=X,
        labels=None,
        prevalence_initial=prevalence_initial,
        source=source,
        seed=seed,
        meta={"feature_scale": feature_scale},
    )


def generate_outcomes(
    cohort: Cohort, params: ModificationParams, seed: int
) -> np.ndarray:
    """Draw 0/1 outcomes from the recalibration + revision model.

    ``P(Y=1) = expit(alpha0 + alpha1 * S + X @ gamma)`` per subject.
    Returns the label vector; the cohort is not mutated.
    """
    if cohort.scores is None or cohort.n == 0:
        raise ValueError("cohort scores must be populated")
    eta = params.alpha0 + params.alpha1 * cohort.scores
    if params.gamma is not None and np.any(params.gamma):
        if cohort.features is None:
            raise ValueError("nonzero gamma requires cohort features")
        eta = eta + cohort.features @ params.gamma_or_zeros(cohort.p)
    rng = substream(seed, 1)
    return (rng.random(cohort.n) < expit(eta)).astype(np.int8)


# ---------------------------------------------------------------------------
# Serialization: columnar CSV (x1..xp,score,label) and a binary cache.
# CSV writes floats with %.17g so a round trip is bit exact.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_cohort_csv(cohort: Cohort, path: str | Path) -> None:
    """Write the cohort as CSV with header ``x1..xp,score,label``."""
    p = cohort.p
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(p)] + ["score", "label"])
        for i in range(cohort.n):
            row = (
                [_fmt(v) for v in cohort.features[i]] if p else []
            )
            row.append(_fmt(cohort.scores[i]))
            row.append("" if cohort.labels is None else str(int(cohort.labels[i])))
            writer.writerow(row)


def load_cohort_csv(source: str | Path | io.TextIOBase) -> Cohort:
    """Read a cohort written by :func:`save_cohort_csv`.

    Accepts any CSV with a ``score`` column; ``x*`` feature columns and a
    ``label`` column are optional.  Raises ``ValueError`` naming the first
    offending row on non-numeric or missing values.
    """
    if isinstance(source, (str, Path)):
        fh = open(source, newline="")
        close = True
    else:
        fh = source
        close = False
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty cohort file") from None
        header = [h.strip() for h in header]
        if "score" not in header:
            raise ValueError("cohort file must have a 'score' column")
        score_col = header.index("score")
        label_col = header.index("label") if "label" in header else None
        feat_cols = [
            i
            for i, h in enumerate(header)
            if i not in (score_col, label_col) and h != ""
        ]
        scores, feats, labels = [], [], []
        any_label = False
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                scores.append(float(row[score_col]))
                feats.append([float(row[i]) for i in feat_cols])
            except (ValueError, IndexError):
                raise ValueError(f"non-numeric or missing value at row {lineno}") from None
            if not np.isfinite(scores[-1]) or not all(np.isfinite(v) for v in feats[-1]):
                raise ValueError(f"non-finite value at row {lineno}")
            if label_col is not None and label_col < len(row) and row[label_col] != "":
                if row[label_col] not in ("0", "1"):
                    raise ValueError(f"label must be 0/1 at row {lineno}")
                labels.append(int(row[label_col]))
                any_label = True
            else:
                labels.append(-1)
        if not scores:
            raise ValueError("cohort file has no data rows")
        if any_label and -1 in labels:
            raise ValueError("label column must be fully populated or fully empty")
        return Cohort(
            scores=np.array(scores),
            features=np.array(feats) if feat_cols else None,
            labels=np.array(labels, dtype=np.int8) if any_label else None,
        )
    finally:
        if close:
            fh.close()


def save_cohort_npz(cohort: Cohort, path: str | Path) -> None:
    """Binary cohort cache; round trips bit-exactly."""
    payload = {"scores": cohort.scores}
    if cohort.features is not None:
        payload["features"] = cohort.features
    if cohort.labels is not None:
        payload["labels"] = cohort.labels
    if cohort.prevalence_initial is not None:
        payload["prevalence_initial"] = np.array(cohort.prevalence_initial)
    np.savez_compressed(path, **payload)


def load_cohort_npz(path: str | Path) -> Cohort:
    with np.load(path) as z:
        return Cohort(
            scores=z["scores"],
            features=z["features"] if "features" in z else None,
            labels=z["labels"] if "labels" in z else None,
            prevalence_initial=(
                float(z["prevalence_initial"]) if "prevalence_initial" in z else None
            ),
        )
