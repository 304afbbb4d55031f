"""Score information functions for design evaluation.

Two one-number summaries of how informative a sample of scores is for
model updating: the log-determinant of the 2x2 partial information
matrix of the recalibration intercept/slope (a D-optimality criterion),
and the binary entropy of the mean predicted probability (a class-balance
criterion).  Both can be evaluated under the null modification (predicted
probabilities are expit of the scores) or under assumed true modification
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as _expit

from .datagen import ModificationParams

__all__ = [
    "expit",
    "predicted_probs",
    "recal_info_matrix",
    "phi_d",
    "phi_b",
    "compare_designs",
    "ComparisonReport",
]


def expit(x):
    """Inverse logit, ``1 / (1 + exp(-x))``."""
    return _expit(x)


def predicted_probs(
    scores: np.ndarray,
    features: np.ndarray | None = None,
    assumed: ModificationParams | None = None,
) -> np.ndarray:
    """Outcome probabilities under assumed modification parameters.

    ``p_i = expit(alpha0 + alpha1 * S_i + X_i @ gamma)``; with the default
    null parameters this is just ``expit(S)``.  Features are required only
    when gamma has nonzero entries.
    """
    s = np.asarray(scores, dtype=float)
    if assumed is None or assumed.is_null:
        return _expit(s)
    eta = assumed.alpha0 + assumed.alpha1 * s
    if assumed.gamma is not None and np.any(assumed.gamma):
        if features is None:
            raise ValueError("nonzero gamma requires features")
        X = np.asarray(features, dtype=float)
        if X.shape[0] != s.shape[0]:
            raise ValueError("features and scores disagree on length")
        eta = eta + X @ assumed.gamma
    return _expit(eta)


def recal_info_matrix(scores: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Per-observation average information matrix for (intercept, slope).

    Entries are ``mean(v)``, ``mean(v*S)`` and ``mean(v*S^2)`` with
    variance weights ``v = p (1 - p)``; symmetric positive semi-definite
    by construction.
    """
    s = np.asarray(scores, dtype=float)
    p = np.asarray(probs, dtype=float)
    if s.shape != p.shape:
        raise ValueError("scores and probs must have equal length")
    v = p * (1.0 - p)
    n = s.shape[0]
    m00 = v.sum() / n
    m01 = (v * s).sum() / n
    m11 = (v * s * s).sum() / n
    return np.array([[m00, m01], [m01, m11]])


def phi_d(scores: np.ndarray, probs: np.ndarray) -> float:
    """Log-determinant of the recalibration information matrix.

    Returns ``-inf`` (rather than raising) for singular cases: fewer than
    two observations, all scores identical, or vanishing variance weights.
    Larger values mean a smaller joint confidence region for the
    recalibration intercept and slope.
    """
    s = np.asarray(scores, dtype=float)
    if s.shape[0] < 2:
        return float("-inf")
    m = recal_info_matrix(s, probs)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[0, 1]
    if det <= 0.0 or not np.isfinite(det):
        return float("-inf")
    return float(np.log(det))


def phi_b(probs: np.ndarray) -> float:
    """Binary entropy (base 2) of the mean predicted probability.

    Lies in [0, 1]; equals 1 exactly when the expected sample prevalence
    is 50%.  The ``0 * log2(0)`` limit is taken as 0.
    """
    p = np.asarray(probs, dtype=float)
    if p.size == 0:
        raise ValueError("probs must be nonempty")
    pbar = float(p.mean())
    if pbar <= 0.0 or pbar >= 1.0:
        return 0.0
    return float(-pbar * np.log2(pbar) - (1.0 - pbar) * np.log2(1.0 - pbar))


@dataclass(frozen=True)
class ComparisonReport:
    """Quantitative design comparison derived from two information values."""

    det_ratio: float
    prevalence_ratio: float
    phi_d_a: float
    phi_d_b: float
    pbar_a: float
    pbar_b: float


def compare_designs(
    phi_d_a: float, phi_d_b: float, pbar_a: float, pbar_b: float
) -> ComparisonReport:
    """Determinant ratio ``exp(phi_d_a - phi_d_b)`` and prevalence ratio.

    The determinant ratio is how many times smaller design A's expected
    recalibration confidence region is than design B's.
    """
    for name, v in (("phi_d_a", phi_d_a), ("phi_d_b", phi_d_b),
                    ("pbar_a", pbar_a), ("pbar_b", pbar_b)):
        if not np.isfinite(v):
            raise ValueError(f"{name} must be finite")
    if pbar_b == 0.0:
        raise ValueError("pbar_b must be nonzero")
    return ComparisonReport(
        det_ratio=float(np.exp(phi_d_a - phi_d_b)),
        prevalence_ratio=float(pbar_a / pbar_b),
        phi_d_a=phi_d_a,
        phi_d_b=phi_d_b,
        pbar_a=pbar_a,
        pbar_b=pbar_b,
    )
