"""Scikit-learn style wrappers around the marginal and correlation fitters.

These adapt the functional estimation API to the fit/transform protocol so
the two stages compose with standard tooling (pipelines, cross-validation
splitters, clone/get_params round trips).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dcc import DccState, dcc_filter, fit_dcc
from .errors import ValidationError
from .marginals import arma_filter, egarch_filter, fit_marginal
from .validation import check_matrix, check_series


def _as_panel(X, name="X") -> np.ndarray:
    """Accept a (T,) series or (T, k) panel; always return 2-D float array."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = check_series(arr, min_len=2, name=name)[:, None]
    elif arr.ndim == 2:
        arr = check_matrix(arr, min_rows=2, min_cols=1, name=name)
    else:
        raise ValidationError(f"{name} must be 1-D or 2-D, got ndim={arr.ndim}")
    return arr


class MarginalVolatilityModel(TransformerMixin, BaseEstimator):
    """Per-column conditional mean/variance filter fitted by likelihood.

    fit() estimates one ARMA + exponential-GARCH model per column of X;
    transform() runs the fitted filters over (possibly new) data with the
    same column layout and returns the standardized residual panel.

    Parameters
    ----------
    p, q : AR and MA orders of the conditional mean.
    r, s : shock and persistence orders of the log-variance recursion.
    min_obs : minimum rows required to fit.
    """

    def __init__(self, p=1, q=0, r=1, s=1, min_obs=200):
        self.p = p
        self.q = q
        self.r = r
        self.s = s
        self.min_obs = min_obs

    def _check_parameters(self):
        for name in ("p", "q", "r", "s"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValidationError(f"{name} must be a non-negative integer, got {v!r}")
        if int(self.r) < 1 or int(self.s) < 1:
            raise ValidationError("r and s must be >= 1 for the variance recursion")
        if int(self.min_obs) < 10:
            raise ValidationError(f"min_obs must be >= 10, got {self.min_obs!r}")

    def fit(self, X, y=None):
        self._check_parameters()
        panel = _as_panel(X)
        orders = (int(self.p), int(self.q), int(self.r), int(self.s))
        self.models_ = [
            fit_marginal(panel[:, j], orders, min_obs=int(self.min_obs))
            for j in range(panel.shape[1])
        ]
        self.n_features_in_ = panel.shape[1]
        self.loglik_ = float(sum(m.loglik for m in self.models_))
        return self

    def transform(self, X):
        check_is_fitted(self, "models_")
        panel = _as_panel(X)
        if panel.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {panel.shape[1]} columns, fitted on {self.n_features_in_}")
        out = np.empty_like(panel)
        for j, model in enumerate(self.models_):
            mu, y_resid = arma_filter(model.arma, panel[:, j])
            h = egarch_filter(model.egarch, y_resid)
            out[:, j] = y_resid / np.sqrt(h)
        return out

    def conditional_moments(self, X):
        """Filter new data; return (mean panel, variance panel)."""
        check_is_fitted(self, "models_")
        panel = _as_panel(X)
        if panel.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {panel.shape[1]} columns, fitted on {self.n_features_in_}")
        mu_out = np.empty_like(panel)
        h_out = np.empty_like(panel)
        for j, model in enumerate(self.models_):
            mu, y_resid = arma_filter(model.arma, panel[:, j])
            mu_out[:, j] = mu
            h_out[:, j] = egarch_filter(model.egarch, y_resid)
        return mu_out, h_out


class DccCorrelationModel(TransformerMixin, BaseEstimator):
    """Dynamic conditional correlation of a standardized shock panel.

    fit() estimates the correlation recursion and copula tail parameter on
    the shock panel X (rows: weeks, columns: entities); transform() filters
    a shock panel through the fitted recursion and returns the flattened
    upper triangle of each week's correlation matrix, shape (T, k(k-1)/2).
    """

    def __init__(self, m=1, n=1, min_obs=200):
        self.m = m
        self.n = n
        self.min_obs = min_obs

    def _check_parameters(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if int(self.min_obs) < 10:
            raise ValidationError(f"min_obs must be >= 10, got {self.min_obs!r}")

    def fit(self, X, y=None):
        self._check_parameters()
        panel = check_matrix(np.asarray(X, dtype=float), min_rows=2, min_cols=2,
                             name="X")
        self.params_ = fit_dcc(panel, (int(self.m), int(self.n)),
                               min_obs=int(self.min_obs))
        self.state_ = dcc_filter(self.params_, panel, keep_q=False)
        self.n_features_in_ = panel.shape[1]
        self.loglik_ = self.params_.diagnostics.get("loglik")
        return self

    def filter(self, X) -> DccState:
        """Run the fitted recursion over a shock panel; return the full state."""
        check_is_fitted(self, "params_")
        panel = check_matrix(np.asarray(X, dtype=float), min_rows=2, min_cols=2,
                             name="X")
        if panel.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {panel.shape[1]} columns, fitted on {self.n_features_in_}")
        return dcc_filter(self.params_, panel, keep_q=False)

    def transform(self, X):
        state = self.filter(X)
        k = state.r_series.shape[1]
        iu = np.triu_indices(k, 1)
        return state.r_series[:, iu[0], iu[1]]
