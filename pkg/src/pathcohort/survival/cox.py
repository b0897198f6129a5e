"""Cox proportional hazards: Breslow partial likelihood, Newton and L1 (ISTA) fits.

Covariates are standardized (population std, constant columns left at
scale 1) before fitting, so coefficients are comparable across factors.
Ties share one risk-set denominator (Breslow).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_is_fitted

from .._validation import check_survival_target, check_vectors
from ..exceptions import NonFinite, NoSE, SeparationWarning
from .dataset import SurvivalDataset
from .special import normal_two_sided_p

DEFAULT_LAMBDA_GRID = np.logspace(-4, 0, 30)
FLAT_CURVATURE = 1e-6


class PartialLikelihood:
    """Breslow partial log-likelihood of a fixed design, with derivatives.

    Subjects are sorted once by descending time; the risk set of a subject
    is then a prefix ending at the last subject tied with it.
    """

    def __init__(self, X, time, event):
        X = np.asarray(X, dtype=np.float64)
        time = np.asarray(time, dtype=np.float64)
        order = np.argsort(-time, kind="stable")
        self.X = X[order]
        self.time = time[order]
        self.event = np.asarray(event, dtype=bool)[order]
        neg = -self.time
        self.last = np.searchsorted(neg, neg, side="right") - 1
        self.ev_last = self.last[self.event]
        self.n = time.size

    def _eta(self, beta):
        return self.X @ np.asarray(beta, dtype=np.float64)

    def loglik(self, beta):
        eta = self._eta(beta)
        if not self.event.any():
            return 0.0
        log_s0 = np.logaddexp.accumulate(eta)
        val = float(np.sum(eta[self.event]) - np.sum(log_s0[self.ev_last]))
        if not math.isfinite(val):
            raise NonFinite("partial log-likelihood is not finite")
        return val

    def _weights(self, beta):
        eta = self._eta(beta)
        w = np.exp(eta - eta.max())
        s0 = np.cumsum(w)[self.ev_last]
        if np.any(s0 <= 0) or not np.all(np.isfinite(s0)):
            raise NonFinite("risk-set denominator underflowed")
        return w, s0

    def gradient(self, beta):
        if not self.event.any():
            return np.zeros(self.X.shape[1])
        w, s0 = self._weights(beta)
        s1 = np.cumsum(w[:, None] * self.X, axis=0)[self.ev_last]
        return np.sum(self.X[self.event] - s1 / s0[:, None], axis=0)

    def information(self, beta):
        """Observed information (negative Hessian)."""
        p = self.X.shape[1]
        if not self.event.any():
            return np.zeros((p, p))
        w, s0 = self._weights(beta)
        s1 = np.cumsum(w[:, None] * self.X, axis=0)[self.ev_last]
        s2 = np.cumsum(w[:, None, None] * self.X[:, :, None] * self.X[:, None, :], axis=0)[self.ev_last]
        mean = s1 / s0[:, None]
        return np.sum(s2 / s0[:, None, None] - mean[:, :, None] * mean[:, None, :], axis=0)


def cox_loglik(ds, beta):
    """Partial log-likelihood of ``ds`` (covariates used as given)."""
    ds.require_complete()
    return PartialLikelihood(ds.covariates, ds.times, ds.events).loglik(beta)


def cox_gradient(ds, beta):
    ds.require_complete()
    return PartialLikelihood(ds.covariates, ds.times, ds.events).gradient(beta)


@dataclass
class CoxFit:
    names: tuple
    beta: np.ndarray
    loglik: float
    loglik_trace: list
    se: np.ndarray
    converged: bool
    iterations: int
    penalty: float
    column_means: np.ndarray
    column_scales: np.ndarray
    separation: bool = False
    se_from_refit: bool = False
    method: str = "newton"
    cv: dict = field(default=None)

    @property
    def active(self):
        return np.flatnonzero(self.beta != 0)

    def to_dict(self):
        rows = []
        hrs = {h.name: h for h in hazard_ratios(self, strict=False)}
        for j, name in enumerate(self.names):
            h = hrs[name]
            rows.append({
                "name": name,
                "beta": _num(self.beta[j]),
                "se": _num(self.se[j]),
                "hr": _num(h.hr),
                "ci_low": _num(h.ci_low),
                "ci_high": _num(h.ci_high),
                "p": _num(h.p_value),
            })
        out = {
            "coefficients": rows,
            "loglik": _num(self.loglik),
            "iterations": self.iterations,
            "converged": bool(self.converged),
            "lambda": _num(self.penalty),
            "separation": bool(self.separation),
            "se_from_refit": bool(self.se_from_refit),
        }
        if self.cv is not None:
            out["cv"] = self.cv
        return out


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _newton(pl, beta0, max_iter, tol, step_tol, gtol, bound):
    beta = np.array(beta0, dtype=np.float64)
    ll = pl.loglik(beta)
    trace = [ll]
    converged = separation = False
    method = "newton"
    it = 0
    for it in range(1, max_iter + 1):
        g = pl.gradient(beta)
        if np.max(np.abs(g), initial=0.0) == 0.0:
            converged = True
            break
        info = pl.information(beta)
        try:
            chol = np.linalg.cholesky(info)
            step = np.linalg.solve(chol.T, np.linalg.solve(chol, g))
            ascent = False
        except np.linalg.LinAlgError:
            step = g
            ascent = True
            method = "newton+gradient"
        slope = float(g @ step)
        t = 1.0
        accepted = False
        for _ in range(60):
            cand = beta + t * step
            try:
                cl = pl.loglik(cand)
            except NonFinite:
                cl = -np.inf
            # Armijo condition for the fallback, plain ascent for Newton
            need = ll + (1e-4 * t * slope if ascent else 0.0)
            if cl >= need:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = np.max(np.abs(g)) < gtol
            break
        dl, db = cl - ll, np.max(np.abs(cand - beta))
        beta, ll = cand, cl
        trace.append(ll)
        if np.max(np.abs(beta)) > bound:
            separation = True
            break
        if db < step_tol or (abs(dl) < tol and np.max(np.abs(pl.gradient(beta))) < gtol):
            converged = True
            break
    if beta.size and np.max(np.abs(beta)) > 10.0:
        # a flat ridge far from the origin means the optimum is at infinity
        curv = np.linalg.eigvalsh(pl.information(beta))[0]
        if curv < FLAT_CURVATURE * max(int(pl.event.sum()), 1):
            separation = True
    return beta, ll, trace, converged, separation, it, method


def _ista(pl, lam, beta0, max_iter, gtol, bound):
    """Proximal gradient on -l/N + lam*|beta|_1, Barzilai-Borwein step with backtracking."""
    n = pl.n
    beta = np.array(beta0, dtype=np.float64)
    f = -pl.loglik(beta) / n
    g = -pl.gradient(beta) / n
    trace = [-f * n]
    t = 1.0
    converged = separation = False
    it = 0
    for it in range(1, max_iter + 1):
        for _ in range(100):
            z = _soft_threshold(beta - t * g, t * lam)
            d = z - beta
            try:
                fz = -pl.loglik(z) / n
            except NonFinite:
                fz = np.inf
            if fz <= f + g @ d + (d @ d) / (2.0 * t) + 1e-15 * abs(f):
                break
            t *= 0.5
        gz = -pl.gradient(z) / n
        mapping = np.max(np.abs(d), initial=0.0) / t
        s, y = d, gz - g
        beta, f, g = z, fz, gz
        trace.append(-f * n)
        if np.max(np.abs(beta), initial=0.0) > bound:
            separation = True
            break
        if mapping < gtol:
            converged = True
            break
        sy = float(s @ y)
        t = float(np.clip((s @ s) / sy, 1e-8, 1e8)) if sy > 0 else min(t * 2.0, 1e8)
    return beta, -f * n, trace, converged, separation, it


def _standardize(ds):
    mean, scale = ds.column_stats
    return (ds.covariates - mean) / scale, np.asarray(mean, float), np.asarray(scale, float)


def _fit_design(pl, lam, beta0, max_iter, tol, step_tol, gtol, bound):
    if lam == 0:
        return _newton(pl, beta0, max_iter, tol, step_tol, gtol, bound)
    beta, ll, trace, conv, sep, it = _ista(pl, lam, beta0, max_iter, gtol * 1e-3, bound)
    return beta, ll, trace, conv, sep, it, "ista"


def _standard_errors(pl, beta):
    p = beta.size
    if p == 0:
        return np.zeros(0)
    try:
        cov = np.linalg.inv(pl.information(beta))
    except np.linalg.LinAlgError:
        return np.full(p, np.nan)
    var = np.diag(cov)
    return np.where(var > 0, np.sqrt(np.abs(var)), np.nan)


def cox_fit(ds, lam=0.0, *, max_iter=None, tol=1e-9, step_tol=1e-8, gtol=1e-6,
            separation_bound=50.0, beta0=None, cv_folds=5, seed=0, lambda_grid=None):
    """Fit a Cox model to ``ds`` on standardized covariates.

    Parameters
    ----------
    lam : float or "cv"
        L1 penalty. ``0`` fits the plain model by Newton-Raphson with step
        halving; ``> 0`` runs proximal gradient on ``-l/N + lam * |beta|_1``;
        ``"cv"`` picks the penalty by cross-validated partial likelihood.
    max_iter : int, optional
        Defaults to 200 for Newton and 10000 for proximal gradient.

    Returns
    -------
    CoxFit
        Coefficients in standardized space. For penalized fits standard
        errors come from an unpenalized refit on the active set.
    """
    ds.require_complete()
    if ds.n < 2:
        raise ValueError("need at least two subjects to fit")
    cv = None
    if isinstance(lam, str):
        if lam != "cv":
            raise ValueError(f"lam must be a number or 'cv', got {lam!r}")
        cv = select_lambda_cv(ds, lambda_grid, cv_folds, seed)
        lam = cv["lambda"]
    lam = float(lam)
    if lam < 0:
        raise ValueError("penalty must be non-negative")

    Xs, mean, scale = _standardize(ds)
    pl = PartialLikelihood(Xs, ds.times, ds.events)
    if max_iter is None:
        max_iter = 200 if lam == 0 else 10_000
    b0 = np.zeros(ds.p) if beta0 is None else np.asarray(beta0, float)
    beta, ll, trace, converged, sep, it, method = _fit_design(
        pl, lam, b0, max_iter, tol, step_tol, gtol, separation_bound)

    se_refit = False
    if lam == 0:
        se = _standard_errors(pl, beta)
    else:
        se = np.full(ds.p, np.nan)
        active = np.flatnonzero(beta != 0)
        if active.size:
            sub = PartialLikelihood(Xs[:, active], ds.times, ds.events)
            rb, *_ = _newton(sub, beta[active], 200, tol, step_tol, gtol, separation_bound)
            se[active] = _standard_errors(sub, rb)
            se_refit = True

    if sep:
        warnings.warn(
            f"coefficient exceeded {separation_bound} in magnitude; likelihood is monotone "
            "(separation)", SeparationWarning, stacklevel=2)
    elif not converged:
        warnings.warn(f"Cox fit did not converge in {max_iter} iterations",
                      ConvergenceWarning, stacklevel=2)
    return CoxFit(
        names=ds.names, beta=beta, loglik=ll, loglik_trace=trace, se=se,
        converged=bool(converged and not sep), iterations=it, penalty=lam,
        column_means=mean, column_scales=scale, separation=sep,
        se_from_refit=se_refit, method=method, cv=cv,
    )


def select_lambda_cv(ds, grid=None, n_folds=5, seed=0):
    """Choose the L1 penalty by K-fold cross-validated partial likelihood.

    Each fold is scored as ``l_full(b) - l_train(b)`` with ``b`` fitted on
    the training folds. The grid is walked from the largest penalty down
    with warm starts; ties go to the larger penalty.
    """
    grid = np.sort(np.asarray(DEFAULT_LAMBDA_GRID if grid is None else grid, float))[::-1]
    Xs, _, _ = _standardize(ds)
    full = PartialLikelihood(Xs, ds.times, ds.events)
    rng = np.random.default_rng(seed)
    folds = np.array_split(rng.permutation(ds.n), min(n_folds, ds.n))
    scores = np.zeros(grid.size)
    for held in folds:
        train = np.setdiff1d(np.arange(ds.n), held)
        pl = PartialLikelihood(Xs[train], ds.times[train], ds.events[train])
        beta = np.zeros(ds.p)
        for i, lam in enumerate(grid):
            beta, *_ = _ista(pl, lam, beta, 10_000, 1e-9, 50.0)
            scores[i] += full.loglik(beta) - pl.loglik(beta)
    best = int(np.argmax(scores))
    return {
        "lambda": float(grid[best]),
        "seed": int(seed),
        "n_folds": len(folds),
        "grid": grid.tolist(),
        "scores": scores.tolist(),
    }


@dataclass(frozen=True)
class HazardRatio:
    name: str
    hr: float
    ci_low: float
    ci_high: float
    p_value: float

    def format(self):
        """Table-style ``HR(low-high)`` with three decimals."""
        return f"{self.hr:.3f}({self.ci_low:.3f}-{self.ci_high:.3f})"


def hazard_ratios(fit, z=1.959963984540054, strict=True):
    """Per-covariate hazard ratio, Wald confidence interval and two-sided p.

    Ratios are per one standard deviation of the raw covariate.
    """
    se = np.asarray(fit.se, float)
    if strict and (se.size == 0 or np.all(np.isnan(se))):
        raise NoSE("fit has no standard errors")
    out = []
    for name, b, s in zip(fit.names, fit.beta, se):
        hr = math.exp(b)
        if math.isnan(s):
            out.append(HazardRatio(name, hr, math.nan, math.nan, math.nan))
            continue
        lo, hi = math.exp(b - z * s), math.exp(b + z * s)
        if s == 0:
            p = 1.0 if b == 0 else 0.0
        else:
            p = normal_two_sided_p(b / s)
        out.append(HazardRatio(name, hr, lo, hi, p))
    return out


@dataclass(frozen=True)
class BaselineHazard:
    times: np.ndarray
    cumulative_hazard: np.ndarray

    def at(self, t):
        k = np.searchsorted(self.times, t, side="right")
        return 0.0 if k == 0 else float(self.cumulative_hazard[k - 1])


def baseline_hazard(ds, fit):
    """Breslow cumulative baseline hazard at covariates equal to the column means."""
    eta = ((ds.covariates - fit.column_means) / fit.column_scales) @ fit.beta
    ev_times = np.unique(ds.times[ds.events])
    w = np.exp(eta)
    order = np.argsort(ds.times, kind="stable")
    t_sorted, w_sorted = ds.times[order], w[order]
    tail = np.cumsum(w_sorted[::-1])[::-1]
    idx = np.searchsorted(t_sorted, ev_times, side="left")
    d = np.array([np.count_nonzero(ds.times[ds.events] == t) for t in ev_times], float)
    return BaselineHazard(ev_times, np.cumsum(d / tail[idx]))


def risk_index(fit, x):
    """Linear predictor of raw covariates ``x`` (one row or a matrix)."""
    x = np.asarray(x, dtype=np.float64)
    return ((x - fit.column_means) / fit.column_scales) @ fit.beta


class CoxPH(BaseEstimator):
    """Cox proportional hazards estimator with an optional L1 penalty.

    Parameters
    ----------
    alpha : float or "cv", default=0.0
        L1 penalty on standardized coefficients; ``"cv"`` selects it by
        5-fold cross-validated partial likelihood.
    max_iter : int or None
    tol : float, default=1e-9
    random_state : int, default=0
        Seed for the cross-validation fold assignment.

    Attributes
    ----------
    coef_ : ndarray
        Standardized coefficients.
    fit_ : CoxFit
    """

    def __init__(self, alpha=0.0, max_iter=None, tol=1e-9, random_state=0):
        self.alpha = alpha
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y, feature_names=None):
        X = check_vectors(X)
        time, event = check_survival_target(y, X.shape[0])
        if feature_names is None and hasattr(X, "columns"):
            feature_names = list(X.columns)
        ds = SurvivalDataset(time, event, X, tuple(feature_names or ()))
        self.fit_ = cox_fit(ds, self.alpha, max_iter=self.max_iter, tol=self.tol, seed=self.random_state)
        self.coef_ = self.fit_.beta
        self.feature_names_in_ = np.asarray(ds.names, dtype=object)
        self.n_features_in_ = ds.p
        return self

    def predict(self, X):
        """Risk index (linear predictor) of each row."""
        check_is_fitted(self, "fit_")
        return risk_index(self.fit_, check_vectors(X, self.n_features_in_))

    def score(self, X, y):
        """Partial log-likelihood of ``(X, y)`` under the fitted coefficients."""
        check_is_fitted(self, "fit_")
        X = check_vectors(X, self.n_features_in_)
        time, event = check_survival_target(y, X.shape[0])
        Xs = (X - self.fit_.column_means) / self.fit_.column_scales
        return PartialLikelihood(Xs, time, event).loglik(self.coef_)

    def hazard_ratios(self):
        check_is_fitted(self, "fit_")
        return hazard_ratios(self.fit_)
