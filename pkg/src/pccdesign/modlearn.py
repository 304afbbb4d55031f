"""Model updating on abstracted samples: recalibration fits, likelihood
ratio tests, and the score-preserving lasso path for revision.

Recalibration refits the intercept/slope of the original score by
iteratively reweighted least squares.  Revision fits all feature effects
jointly with the score through an l1 penalty that never touches the
intercept or the score coefficient, so the original model is retained in
the fit.  Support recovery compares selected feature sets against the
generating truth along the penalty path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from numba import njit
from scipy.special import expit
from scipy.stats import chi2

__all__ = [
    "RecalConstraint",
    "RecalFit",
    "LrtResult",
    "NonConvergenceError",
    "LassoPath",
    "RecoveryCurve",
    "fit_recalibration",
    "recalibration_tests",
    "fit_lasso_path",
    "penalized_objective",
    "auto_lambda_grid",
    "lambda_grid_fixed_range",
    "support_recovery",
    "support_recovery_alt",
    "save_path_csv",
]


class NonConvergenceError(RuntimeError):
    """A fit required for a test did not converge (separation, one-class sample)."""


class RecalConstraint(Enum):
    FREE_BOTH = "free_both"
    FIX_SLOPE_1 = "fix_slope_1"
    FIX_BOTH = "fix_both"


@dataclass(frozen=True)
class RecalFit:
    alpha0_hat: float
    alpha1_hat: float
    loglik: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class LrtResult:
    test: str  # INTERCEPT, SLOPE, LOGISTIC_RECAL
    statistic: float
    df: int
    p_value: float


def loglik_bernoulli(eta: np.ndarray, y: np.ndarray) -> float:
    """Sum log-likelihood of 0/1 outcomes at linear predictor ``eta``."""
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit_recalibration(
    scores: np.ndarray,
    labels: np.ndarray,
    constraint: RecalConstraint = RecalConstraint.FREE_BOTH,
    max_iter: int = 100,
    grad_tol: float = 1e-8,
) -> RecalFit:
    """Fit the recalibration slice of the updating model by IRLS.

    FREE_BOTH fits intercept and slope; FIX_SLOPE_1 treats the score as an
    offset and fits the intercept only; FIX_BOTH just evaluates the
    log-likelihood at (0, 1).  One-class samples and separation are
    reported through ``converged=False`` rather than an exception, so
    replicate loops can drop and count them.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have equal length")

    if constraint is RecalConstraint.FIX_BOTH:
        return RecalFit(0.0, 1.0, loglik_bernoulli(s, y), True, 0)

    # parameters this large mean separation: the gradient can still reach
    # the tolerance while the MLE runs off to infinity
    diverged = 100.0

    one_class = y.min() == y.max()
    if constraint is RecalConstraint.FIX_SLOPE_1:
        a0 = 0.0
        converged = False
        it = 0
        if not one_class:
            for it in range(1, max_iter + 1):
                eta = a0 + s
                p = expit(eta)
                g = float(np.sum(y - p))
                h = float(np.sum(p * (1.0 - p))) + 1e-10
                a0 += g / h
                if abs(g) < grad_tol:
                    converged = abs(a0) < diverged
                    break
        return RecalFit(a0, 1.0, loglik_bernoulli(a0 + s, y), converged, it)

    # FREE_BOTH: 2-parameter Newton with a small ridge guard
    X = np.column_stack([np.ones_like(s), s])
    a = np.array([0.0, 1.0])
    converged = False
    it = 0
    if not one_class:
        for it in range(1, max_iter + 1):
            eta = X @ a
            p = expit(eta)
            g = X.T @ (y - p)
            if np.abs(g).max() < grad_tol:
                converged = np.abs(a).max() < diverged
                break
            w = p * (1.0 - p)
            H = (X * w[:, None]).T @ X + 1e-10 * np.eye(2)
            try:
                step = np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                break
            a = a + step
            if not np.all(np.isfinite(a)) or np.abs(a).max() > 1e6:
                converged = False
                break
    eta = X @ a
    return RecalFit(float(a[0]), float(a[1]), loglik_bernoulli(eta, y), converged, it)


def recalibration_tests(scores: np.ndarray, labels: np.ndarray) -> dict[str, LrtResult]:
    """Three nested likelihood ratio tests of the recalibration parameters.

    INTERCEPT: intercept free vs (0, 1), slope fixed at 1 (df 1).
    SLOPE: both free vs intercept free with slope 1 (df 1).
    LOGISTIC_RECAL: both free vs (0, 1) (df 2).

    Statistics telescope: INTERCEPT + SLOPE = LOGISTIC_RECAL.  Raises
    :class:`NonConvergenceError` when a required fit fails.
    """
    full = fit_recalibration(scores, labels, RecalConstraint.FREE_BOTH)
    intercept_only = fit_recalibration(scores, labels, RecalConstraint.FIX_SLOPE_1)
    null = fit_recalibration(scores, labels, RecalConstraint.FIX_BOTH)
    if not (full.converged and intercept_only.converged):
        raise NonConvergenceError("recalibration fit did not converge")

    def lrt(name, ll1, ll0, df):
        stat = max(2.0 * (ll1 - ll0), 0.0)
        return LrtResult(name, stat, df, float(chi2.sf(stat, df)))

    return {
        "INTERCEPT": lrt("INTERCEPT", intercept_only.loglik, null.loglik, 1),
        "SLOPE": lrt("SLOPE", full.loglik, intercept_only.loglik, 1),
        "LOGISTIC_RECAL": lrt("LOGISTIC_RECAL", full.loglik, null.loglik, 2),
    }


# ---------------------------------------------------------------------------
# Score-preserving lasso path
# ---------------------------------------------------------------------------


@dataclass
class LassoPath:
    """Solutions along a descending penalty grid.

    Coefficients are on the original feature scale; the intercept and the
    score coefficient are never penalized, so they stay nonzero by
    construction.  ``objective_trace`` is populated only when the fit was
    run with ``track_objective=True``.
    """

    lambda_grid: np.ndarray
    alpha0: np.ndarray
    alpha1: np.ndarray
    gamma: np.ndarray  # (n_lambda, p)
    converged: np.ndarray
    sweeps: np.ndarray
    objective_trace: list[np.ndarray] | None = None

    @property
    def n_lambdas(self) -> int:
        return self.lambda_grid.shape[0]

    def active_set(self, li: int) -> np.ndarray:
        return np.flatnonzero(self.gamma[li] != 0.0)


@njit(cache=True, nogil=True)
def _log1pexp(x):
    if x > 35.0:
        return x
    if x < -35.0:
        return np.exp(x)
    return np.log1p(np.exp(x))


@njit(cache=True, nogil=True)
def _objective(eta, y, theta, lam, pen):
    f = 0.0
    for i in range(eta.shape[0]):
        f += _log1pexp(eta[i]) - y[i] * eta[i]
    for j in range(theta.shape[0]):
        if pen[j] > 0.0:
            f += lam * pen[j] * abs(theta[j])
    return f


@njit(cache=True, nogil=True)
def _full_stats(Z, y, eta, grad, v):
    """Likelihood value, full gradient, and per-observation variance
    weights at the current point.  One exp pass."""
    n, d = Z.shape
    for j in range(d):
        grad[j] = 0.0
    nll = 0.0
    for i in range(n):
        nll += _log1pexp(eta[i]) - y[i] * eta[i]
        p = 1.0 / (1.0 + np.exp(-eta[i]))
        v[i] = p * (1.0 - p)
        r = p - y[i]
        for j in range(d):
            grad[j] += Z[i, j] * r
    return nll


@njit(cache=True, nogil=True)
def _safe_pass(Z, G, theta, eta, grad, lam, pen):
    """One full coordinate pass on the global curvature bound ``G_jj / 4``.

    A provable descent step from the current point; small enough change
    here certifies stationarity for every coordinate.  Keeps the bound's
    gradient up to date.  Returns the largest coefficient change.
    """
    n, d = Z.shape
    max_delta = 0.0
    for j in range(d):
        Lj = 0.25 * G[j, j]
        if Lj <= 0.0:
            continue
        u = theta[j] - grad[j] / Lj
        if pen[j] > 0.0:
            t = lam * pen[j] / Lj
            if u > t:
                new = u - t
            elif u < -t:
                new = u + t
            else:
                new = 0.0
        else:
            new = u
        delta = new - theta[j]
        if delta != 0.0:
            theta[j] = new
            for i in range(n):
                eta[i] += Z[i, j] * delta
            for k in range(d):
                grad[k] += 0.25 * G[k, j] * delta
            ad = abs(delta)
            if ad > max_delta:
                max_delta = ad
    return max_delta


@njit(cache=True, nogil=True)
def _newton_boost(Z, y, theta, eta, grad, v, lam, pen, work, tol, inner_cap):
    """One damped proximal-Newton step on the working coordinate set.

    Builds the variance-weighted quadratic model, solves it by inner
    coordinate descent, then backtracks on the true penalized objective,
    so every boost is a descent step.  Returns (inner sweeps used,
    step inf-norm).
    """
    n = Z.shape[0]
    m = work.shape[0]
    A = np.empty((m, m))
    for a in range(m):
        ja = work[a]
        for b in range(a, m):
            jb = work[b]
            acc = 0.0
            for i in range(n):
                acc += v[i] * Z[i, ja] * Z[i, jb]
            A[a, b] = acc
            A[b, a] = acc
    delta = np.zeros(m)
    phi = np.empty(m)  # model gradient at theta + delta
    for a in range(m):
        phi[a] = grad[work[a]]
    sweeps = 0
    for _ in range(inner_cap):
        sweeps += 1
        max_d = 0.0
        for a in range(m):
            Aaa = A[a, a]
            if Aaa <= 1e-12:
                continue
            j = work[a]
            cur = theta[j] + delta[a]
            u = cur - phi[a] / Aaa
            if pen[j] > 0.0:
                t = lam * pen[j] / Aaa
                if u > t:
                    new = u - t
                elif u < -t:
                    new = u + t
                else:
                    new = 0.0
            else:
                new = u
            du = new - cur
            if du != 0.0:
                delta[a] += du
                for b in range(m):
                    phi[b] += A[b, a] * du
                ad = abs(du)
                if ad > max_d:
                    max_d = ad
        if max_d < 0.1 * tol:
            break
    # backtracking on the true penalized objective
    eta_step = np.zeros(n)
    for a in range(m):
        if delta[a] != 0.0:
            j = work[a]
            for i in range(n):
                eta_step[i] += Z[i, j] * delta[a]
    f0 = 0.0
    for i in range(n):
        f0 += _log1pexp(eta[i]) - y[i] * eta[i]
    for a in range(m):
        j = work[a]
        if pen[j] > 0.0:
            f0 += lam * pen[j] * abs(theta[j])
    t_step = 1.0
    accepted = False
    for _ in range(40):
        f1 = 0.0
        for i in range(n):
            e = eta[i] + t_step * eta_step[i]
            f1 += _log1pexp(e) - y[i] * e
        for a in range(m):
            j = work[a]
            if pen[j] > 0.0:
                f1 += lam * pen[j] * abs(theta[j] + t_step * delta[a])
        if f1 <= f0 + 1e-12:
            accepted = True
            break
        t_step *= 0.5
    if not accepted:
        return sweeps, 0.0
    max_step = 0.0
    for a in range(m):
        j = work[a]
        theta[j] += t_step * delta[a]
        ad = abs(t_step * delta[a])
        if ad > max_step:
            max_step = ad
    for i in range(n):
        eta[i] += t_step * eta_step[i]
    return sweeps, max_step


@njit(cache=True, nogil=True)
def _fit_path_kernel(Z, y, lam_grid, pen, max_sweeps, tol, track):
    n, d = Z.shape
    G = Z.T @ Z
    theta = np.zeros(d)
    eta = np.zeros(n)
    grad = np.zeros(d)
    v = np.zeros(n)
    n_lam = lam_grid.shape[0]
    coefs = np.zeros((n_lam, d))
    conv = np.zeros(n_lam, dtype=np.bool_)
    sweeps = np.zeros(n_lam, dtype=np.int64)
    trace_cap = max_sweeps if track else 1
    obj_trace = np.full((n_lam, trace_cap), np.nan)

    for li in range(n_lam):
        lam = lam_grid[li]
        used = 0
        boosted = False
        while used < max_sweeps:
            nll = _full_stats(Z, y, eta, grad, v)
            if track and used < trace_cap:
                obj = nll
                for j in range(d):
                    if pen[j] > 0.0:
                        obj += lam * pen[j] * abs(theta[j])
                obj_trace[li, used] = obj
            if boosted:
                # certifying pass from exact gradient: provable descent;
                # tiny movement across all coordinates means the
                # subgradient conditions hold within tol
                delta = _safe_pass(Z, G, theta, eta, grad, lam, pen)
                used += 1
                if delta < tol:
                    conv[li] = True
                    break
                nll = _full_stats(Z, y, eta, grad, v)
            # Newton boost on the working set (unpenalized + active)
            m = 0
            for j in range(d):
                if pen[j] == 0.0 or theta[j] != 0.0:
                    m += 1
            work = np.empty(m, dtype=np.int64)
            c = 0
            for j in range(d):
                if pen[j] == 0.0 or theta[j] != 0.0:
                    work[c] = j
                    c += 1
            inner, _ = _newton_boost(
                Z, y, theta, eta, grad, v, lam, pen, work, tol, 200
            )
            used += inner
            boosted = True
        sweeps[li] = used
        coefs[li] = theta
    return coefs, conv, sweeps, obj_trace


def _standardize(scores: np.ndarray, features: np.ndarray):
    """Center/scale the design for conditioning; penalties are rescaled so the
    optimized objective is exactly the raw-scale one."""
    s = np.asarray(scores, dtype=float)
    X = np.asarray(features, dtype=float)
    n, p = X.shape
    s_mean, s_sd = s.mean(), s.std()
    if s_sd == 0.0:
        s_sd = 1.0
    x_mean = X.mean(axis=0)
    x_sd = X.std(axis=0)
    x_sd[x_sd == 0.0] = 1.0
    Z = np.empty((n, 2 + p))
    Z[:, 0] = 1.0
    Z[:, 1] = (s - s_mean) / s_sd
    Z[:, 2:] = (X - x_mean) / x_sd
    return Z, (s_mean, s_sd, x_mean, x_sd)


def fit_lasso_path(
    scores: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    lambda_grid: np.ndarray,
    max_sweeps: int = 10_000,
    tol: float = 1e-6,
    track_objective: bool = False,
) -> LassoPath:
    """Coordinate descent on the l1-penalized joint updating objective.

    Minimizes ``sum_i [log(1 + exp(eta_i)) - y_i eta_i] + lam * ||gamma||_1``
    with ``eta = alpha0 + alpha1 * S + X @ gamma``; the intercept and score
    coefficient are unpenalized.  Each sweep majorizes the likelihood with
    its global curvature bound and cycles the coordinates, so the penalized
    objective never increases across sweeps.  Solutions are warm-started
    along the descending grid; a lambda that fails to reach ``tol`` within
    ``max_sweeps`` is flagged unconverged.

    The design is standardized internally for conditioning only: the
    per-coordinate penalty is rescaled so the optimized objective is
    exactly the raw-scale objective, and coefficients are mapped back.
    """
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("lambda grid must be positive")
    if np.any(np.diff(lam) > 0):
        raise ValueError("lambda grid must be descending")
    y = np.asarray(labels, dtype=float)
    X = np.asarray(features, dtype=float)
    s = np.asarray(scores, dtype=float)
    if not (s.shape[0] == X.shape[0] == y.shape[0]):
        raise ValueError("scores, features and labels disagree on length")

    Z, (s_mean, s_sd, x_mean, x_sd) = _standardize(s, X)
    p = X.shape[1]
    # factor such that lam * pen_j * |theta_j| == lam * |gamma_orig_j|
    pen = np.concatenate([[0.0, 0.0], 1.0 / x_sd])
    coefs, conv, sweeps, trace = _fit_path_kernel(
        Z, y, lam, pen, max_sweeps, tol, track_objective
    )

    gamma = coefs[:, 2:] / x_sd[None, :]
    alpha1 = coefs[:, 1] / s_sd
    alpha0 = coefs[:, 0] - coefs[:, 1] * s_mean / s_sd - gamma @ x_mean

    objective_trace = None
    if track_objective:
        objective_trace = [
            row[np.isfinite(row)] for row in trace
        ]
    return LassoPath(
        lambda_grid=lam.copy(),
        alpha0=alpha0,
        alpha1=alpha1,
        gamma=gamma,
        converged=conv,
        sweeps=sweeps,
        objective_trace=objective_trace,
    )


def penalized_objective(
    scores: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    alpha0: float,
    alpha1: float,
    gamma: np.ndarray,
    lam: float,
) -> float:
    """Raw-scale penalized objective value (for oracles and monotone checks)."""
    eta = alpha0 + alpha1 * np.asarray(scores, float) + np.asarray(features, float) @ gamma
    y = np.asarray(labels, float)
    nll = float(np.sum(np.logaddexp(0.0, eta) - y * eta))
    return nll + lam * float(np.abs(gamma).sum())


def auto_lambda_grid(
    scores: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    n_points: int = 40,
    min_ratio: float = 0.02,
) -> np.ndarray:
    """Data-driven descending grid from the revision entry point down.

    The largest value is the smallest penalty at which no feature enters
    (max absolute feature-score of the recalibration-only fit), padded 5%;
    the smallest is ``min_ratio`` times that, log-spaced.
    """
    recal = fit_recalibration(scores, labels, RecalConstraint.FREE_BOTH)
    eta0 = recal.alpha0_hat + recal.alpha1_hat * np.asarray(scores, float)
    resid = np.asarray(labels, float) - expit(eta0)
    lam_max = float(np.abs(np.asarray(features, float).T @ resid).max()) * 1.05
    if lam_max <= 0.0 or not np.isfinite(lam_max):
        raise ValueError("could not determine a positive entry penalty")
    return np.geomspace(lam_max, lam_max * min_ratio, n_points)


def lambda_grid_fixed_range(n_points: int = 40) -> np.ndarray:
    """Fixed descending grid on [0.125, 0.5] (log-spaced)."""
    return np.geomspace(0.5, 0.125, n_points)


# ---------------------------------------------------------------------------
# Support recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryCurve:
    """Per-penalty false discovery and false exclusion rates."""

    lambdas: np.ndarray
    fdr: np.ndarray
    fer: np.ndarray
    variant: str  # "STANDARD" or "ALT"
    threshold: float | None = None

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambdas.tolist(), self.fdr.tolist(), self.fer.tolist()))


def support_recovery(path: LassoPath, true_gamma: np.ndarray) -> RecoveryCurve:
    """FDR/FER along the path against the generating coefficients.

    FDR is the share of selected features that are truly zero (0 when
    nothing is selected); FER is the share of truly nonzero features that
    were excluded.
    """
    truth = np.asarray(true_gamma, dtype=float)
    if truth.shape[0] != path.gamma.shape[1]:
        raise ValueError("true_gamma length does not match the fitted path")
    nz = truth != 0.0
    if not nz.any():
        raise ValueError("true_gamma is all zero; exclusion rate is undefined")
    sel = path.gamma != 0.0
    n_sel = sel.sum(axis=1)
    fp = (sel & ~nz[None, :]).sum(axis=1)
    fn = (~sel & nz[None, :]).sum(axis=1)
    fdr = fp / np.maximum(n_sel, 1)
    fer = fn / nz.sum()
    return RecoveryCurve(path.lambda_grid.copy(), fdr, fer, "STANDARD")


def support_recovery_alt(
    path: LassoPath, true_gamma: np.ndarray, threshold: float = 0.5
) -> RecoveryCurve:
    """Thresholded variant splitting truth into high/low/no signal.

    Selecting a low-signal feature (0 < |coef| <= threshold) is not a
    false positive, and excluding one is not a false negative; exclusion
    is charged only against high-signal features.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    truth = np.asarray(true_gamma, dtype=float)
    if truth.shape[0] != path.gamma.shape[1]:
        raise ValueError("true_gamma length does not match the fitted path")
    high = np.abs(truth) > threshold
    zero = truth == 0.0
    if not high.any():
        raise ValueError("no coefficients exceed the high-signal threshold")
    sel = path.gamma != 0.0
    n_sel = sel.sum(axis=1)
    fp = (sel & zero[None, :]).sum(axis=1)
    fn = (~sel & high[None, :]).sum(axis=1)
    fdr = fp / np.maximum(n_sel, 1)
    fer = fn / high.sum()
    return RecoveryCurve(path.lambda_grid.copy(), fdr, fer, "ALT", threshold)


def lrt_results_to_dict(results: dict[str, LrtResult]) -> dict:
    """JSON-ready view of the three recalibration tests."""
    return {
        name: {
            "statistic": r.statistic,
            "df": r.df,
            "p_value": r.p_value,
        }
        for name, r in results.items()
    }


def save_lrt_json(results: dict[str, LrtResult], dest: str | Path) -> None:
    import json

    with open(dest, "w") as fh:
        json.dump(lrt_results_to_dict(results), fh, sort_keys=True, indent=2)


def save_path_csv(path_obj: LassoPath, dest: str | Path) -> None:
    p = path_obj.gamma.shape[1]
    with open(dest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "alpha0", "alpha1"] + [f"gamma_{j + 1}" for j in range(p)])
        for li in range(path_obj.n_lambdas):
            row = [path_obj.lambda_grid[li], path_obj.alpha0[li], path_obj.alpha1[li]]
            row += list(path_obj.gamma[li])
            writer.writerow([format(float(v), ".17g") for v in row])
