"""Dynamic conditional correlations with a Student-t copula likelihood.

The correlation driver follows

    Q_t = (1 - sum c - sum d) Qbar + sum_j c_j e_{t-j} e'_{t-j}
                                   + sum_j d_j Q_{t-j}

with Q_0 = Qbar and unavailable pre-sample terms (both shock outer products
and lagged Q) replaced by Qbar, and R_t is Q_t rescaled to unit diagonal.
Stage-2 estimation targets Qbar at the sample correlation of the shocks and
maximizes the t-copula log-likelihood over (c, d, nu).  The likelihood is
evaluated on fixed copula uniforms — the stage-1 probability transforms of
the shocks (or empirical ranks as a fallback) — mapped to classic-t scores
with the candidate copula dof, so the data never move in copula space and
the profile over nu is a proper likelihood comparison.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit, gammaln, logit, stdtrit

from . import _optim
from .copula import safe_cholesky
from .errors import EstimationError, NumericalError, ValidationError
from .tableio import read_csv, write_csv
from .validation import check_matrix

NU_LOW = 2.1
NU_HIGH = 100.0


@dataclass(frozen=True)
class DccParams:
    """Correlation-dynamics coefficients, target matrix and copula dof."""

    c: tuple[float, ...]
    d: tuple[float, ...]
    qbar: np.ndarray
    nu_copula: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        object.__setattr__(self, "nu_copula", float(self.nu_copula))
        if any(v < 0.0 or not math.isfinite(v) for v in self.c + self.d):
            raise ValidationError("c and d coefficients must be non-negative")
        if sum(self.c) + sum(self.d) >= 1.0:
            raise ValidationError(
                f"sum(c) + sum(d) must stay below 1, got {sum(self.c) + sum(self.d)}"
            )
        if self.nu_copula <= 2.0:
            raise ValidationError(f"copula dof must exceed 2, got {self.nu_copula}")
        Q = np.asarray(self.qbar, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValidationError("qbar must be square")
        if not np.allclose(Q, Q.T, atol=1e-8):
            raise ValidationError("qbar must be symmetric")
        diag = np.diag(Q)
        if np.any(diag <= 0.0):
            raise ValidationError("qbar diagonal must be positive")
        scale = 1.0 / np.sqrt(diag)
        Q = 0.5 * (Q + Q.T) * np.outer(scale, scale)
        np.fill_diagonal(Q, 1.0)
        if float(np.linalg.eigvalsh(Q).min()) < -1e-10:
            raise ValidationError("qbar is not positive semi-definite")
        Q.flags.writeable = False
        object.__setattr__(self, "qbar", Q)

    @property
    def m(self) -> int:
        return len(self.c)

    @property
    def n(self) -> int:
        return len(self.d)

    @property
    def n_entities(self) -> int:
        return self.qbar.shape[0]


@dataclass(frozen=True)
class DccState:
    """Filtered correlation path; ``r_series`` has shape (T, k, k)."""

    params: DccParams
    r_series: np.ndarray
    q_series: np.ndarray | None = None

    def __post_init__(self):
        R = np.asarray(self.r_series, dtype=float)
        object.__setattr__(self, "r_series", R)
        if R.ndim != 3 or R.shape[1] != R.shape[2]:
            raise ValidationError("r_series must be a stack of square matrices")
        if np.abs(R - np.swapaxes(R, 1, 2)).max() > 1e-12:
            raise ValidationError("correlation matrices must be symmetric")
        diags = R[:, np.arange(R.shape[1]), np.arange(R.shape[1])]
        if np.abs(diags - 1.0).max() > 1e-12:
            raise ValidationError("correlation matrices must have unit diagonal")
        if R.size and (R.max() > 1.0 + 1e-12 or R.min() < -1.0 - 1e-12):
            raise ValidationError("correlations must lie in [-1, 1]")
        if R.size and float(np.linalg.eigvalsh(R).min()) < -1e-10:
            raise ValidationError("correlation matrices must be positive semi-definite")

    @property
    def n_weeks(self) -> int:
        return self.r_series.shape[0]

    def pair_series(self, i: int, j: int) -> np.ndarray:
        return self.r_series[:, i, j]


def _normalize_q(Q, t: int):
    diag = np.diag(Q).copy()
    if np.any(diag <= 0.0):
        raise NumericalError("non-positive diagonal in correlation driver", index=t)
    scale = 1.0 / np.sqrt(diag)
    R = Q * np.outer(scale, scale)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R


def dcc_filter(params: DccParams, shocks, keep_q=True) -> DccState:
    """Run the correlation recursion over a (T, k) matrix of shocks."""
    E = check_matrix(shocks, min_rows=1, min_cols=2, name="shocks")
    T, k = E.shape
    if k != params.n_entities:
        raise ValidationError(
            f"shocks have {k} columns but qbar is {params.n_entities}x{params.n_entities}"
        )
    qbar = params.qbar
    a = 1.0 - sum(params.c) - sum(params.d)
    outers = E[:, :, None] * E[:, None, :]

    q_path = np.empty((T, k, k))
    r_path = np.empty((T, k, k))
    q_path[0] = qbar
    r_path[0] = _normalize_q(qbar, 0)
    for t in range(1, T):
        Q = a * qbar
        for j, cj in enumerate(params.c, start=1):
            Q = Q + cj * (outers[t - j] if t - j >= 0 else qbar)
        for j, dj in enumerate(params.d, start=1):
            Q = Q + dj * (q_path[t - j] if t - j >= 0 else qbar)
        q_path[t] = Q
        r_path[t] = _normalize_q(Q, t)

    return DccState(params=params, r_series=r_path,
                    q_series=q_path if keep_q else None)


def _q_path_fast(c: float, d: float, qbar, outers):
    """Closed-form DCC(1,1) driver path via a linear recursive filter."""
    T = outers.shape[0]
    k = outers.shape[1]
    a = 1.0 - c - d
    x = np.concatenate((np.zeros((1, k * k)), outers[:-1].reshape(T - 1, -1)))
    s = lfilter([1.0], [1.0, -d], x, axis=0).reshape(T, k, k)
    powers = np.power(d, np.arange(T))
    if d == 0.0:
        geom = np.ones(T)
        geom[0] = 0.0
    else:
        geom = (1.0 - powers) / (1.0 - d)
    coef = a * geom + powers
    return coef[:, None, None] * qbar + c * s


def rank_uniforms(shocks) -> np.ndarray:
    """Column-wise empirical probability transform: rank / (T + 1).

    A margin-free fallback for when stage-1 uniforms are unavailable; the
    canonical pipeline passes the fitted marginals' probability transforms
    instead.
    """
    E = np.asarray(shocks, dtype=float)
    T = E.shape[0]
    ranks = np.argsort(np.argsort(E, axis=0), axis=0) + 1.0
    return ranks / (T + 1.0)


def copula_scores(uniforms, nu: float) -> np.ndarray:
    """Classic-t quantiles of copula uniforms: z = T_nu^{-1}(u).

    The uniforms are fixed data (stage-1 probability transforms), so
    comparing the copula likelihood across nu is a proper likelihood-ratio
    comparison — the transform back to scores uses the candidate copula nu,
    the points in copula space do not move.
    """
    u = np.asarray(uniforms, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValidationError("copula uniforms must lie strictly inside (0, 1)")
    return stdtrit(nu, u)


def t_copula_loglik(uniforms, r_series, nu: float) -> float:
    """Student-t copula log-likelihood of uniforms along a correlation path."""
    R = np.asarray(r_series, dtype=float)
    z = copula_scores(uniforms, nu)
    T, k = z.shape
    try:
        L = np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        L = np.stack([safe_cholesky(R[t]) for t in range(T)])
    w = np.linalg.solve(L, z[:, :, None])[:, :, 0]
    maha = np.einsum("ti,ti->t", w, w)
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)

    lc = (gammaln(0.5 * (nu + k)) - gammaln(0.5 * nu)
          - 0.5 * k * math.log(nu * math.pi))
    joint = lc - 0.5 * logdet - 0.5 * (nu + k) * np.log1p(maha / nu)
    lm = (gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu)
          - 0.5 * math.log(nu * math.pi))
    margins = lm - 0.5 * (nu + 1.0) * np.log1p(z * z / nu)
    return float(np.sum(joint) - np.sum(margins))


def _unpack_dcc(x, m: int, n: int):
    # clip keeps sum(c) + sum(d) <= 1 - ~2e-12 so downstream 1/(1-d) is finite
    exps = np.exp(np.clip(np.asarray(x[:m + n], dtype=float), -27.0, 27.0))
    denom = 1.0 + exps.sum()
    c = tuple(exps[:m] / denom)
    d = tuple(exps[m:] / denom)
    nu = NU_LOW + (NU_HIGH - NU_LOW) * float(expit(x[m + n]))
    return c, d, nu


def _pack_dcc(c, d, nu: float):
    w = list(c) + list(d)
    slack = 1.0 - sum(w)
    x = [math.log(max(v, 1e-8) / max(slack, 1e-8)) for v in w]
    frac = (nu - NU_LOW) / (NU_HIGH - NU_LOW)
    x.append(float(logit(min(max(frac, 1e-12), 1.0 - 1e-12))))
    return np.asarray(x, dtype=float)


def fit_dcc(shocks, orders=(1, 1), min_obs=200, uniforms=None) -> DccParams:
    """Estimate (c, d, nu) by copula maximum likelihood, targeting Qbar.

    Qbar is pinned to the sample correlation of the shocks; the remaining
    parameters are searched in an unconstrained transform space enforcing
    non-negativity and sum(c)+sum(d) < 1.  The copula likelihood is
    evaluated at fixed copula uniforms: pass the stage-1 probability
    transforms of the shocks as ``uniforms`` (the canonical pipeline does);
    when omitted, column-wise empirical ranks are used.  Raises
    ``EstimationError`` below the observation floor or when no optimizer
    pass converges.
    """
    E = check_matrix(shocks, min_rows=2, min_cols=2, name="shocks")
    T, k = E.shape
    if T < min_obs:
        raise EstimationError(f"need at least {min_obs} observations, got {T}")
    if uniforms is None:
        U = rank_uniforms(E)
    else:
        U = check_matrix(uniforms, min_rows=2, min_cols=2, name="uniforms")
        if U.shape != E.shape:
            raise ValidationError(
                f"uniforms shape {U.shape} does not match shocks {E.shape}")
    m, n = orders
    if m < 1 or n < 1:
        raise ValidationError(f"bad orders {orders}: need m >= 1 and n >= 1")

    qbar = np.corrcoef(E.T)
    outers = E[:, :, None] * E[:, None, :]
    fast = (m, n) == (1, 1)

    def r_path_for(c, d):
        if fast:
            q = _q_path_fast(c[0], d[0], qbar, outers)
            diag = np.sqrt(q[:, np.arange(k), np.arange(k)])
            if np.any(~np.isfinite(diag)) or np.any(diag <= 0.0):
                raise NumericalError("non-positive diagonal in correlation driver")
            r = q / (diag[:, :, None] * diag[:, None, :])
            r = 0.5 * (r + np.swapaxes(r, 1, 2))
            r[:, np.arange(k), np.arange(k)] = 1.0
            return r
        a = 1.0 - sum(c) - sum(d)
        q_path = np.empty((T, k, k))
        r_path = np.empty((T, k, k))
        q_path[0] = qbar
        r_path[0] = _normalize_q(qbar, 0)
        for t in range(1, T):
            Q = a * qbar
            for j, cj in enumerate(c, start=1):
                Q = Q + cj * (outers[t - j] if t - j >= 0 else qbar)
            for j, dj in enumerate(d, start=1):
                Q = Q + dj * (q_path[t - j] if t - j >= 0 else qbar)
            q_path[t] = Q
            r_path[t] = _normalize_q(Q, t)
        return r_path

    def objective(x):
        ctup, dtup, nu = _unpack_dcc(x, m, n)
        try:
            r = r_path_for(ctup, dtup)
            return t_copula_loglik(U, r, nu)
        except (NumericalError, np.linalg.LinAlgError):
            return -np.inf

    x0 = _pack_dcc((0.05 / m,) * m, (0.90 / n,) * n, 8.0)
    x_best, _, diag = _optim.maximize(objective, x0)
    c, d, nu = _unpack_dcc(x_best, m, n)
    if not diag["converged"]:
        raise EstimationError(
            "copula likelihood maximization did not converge",
            best_params={"c": c, "d": d, "nu_copula": nu},
            diagnostics=diag,
        )
    params = DccParams(c=c, d=d, qbar=qbar, nu_copula=nu, diagnostics={})
    state = dcc_filter(params, E, keep_q=False)
    loglik = t_copula_loglik(U, state.r_series, nu)
    diag = dict(diag, loglik=loglik)
    return DccParams(c=c, d=d, qbar=qbar, nu_copula=nu, diagnostics=diag)


# --- exports ---------------------------------------------------------------


def dcc_params_to_dict(params: DccParams) -> dict:
    return {
        "c": list(params.c),
        "d": list(params.d),
        "qbar": [[float(v) for v in row] for row in params.qbar],
        "nu_copula": params.nu_copula,
        "diagnostics": params.diagnostics,
    }


def dcc_params_from_dict(d: dict) -> DccParams:
    return DccParams(c=tuple(d["c"]), d=tuple(d["d"]),
                     qbar=np.asarray(d["qbar"], dtype=float),
                     nu_copula=float(d["nu_copula"]),
                     diagnostics=dict(d.get("diagnostics", {})))


def save_dcc_json(params: DccParams, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dcc_params_to_dict(params), fh, indent=1)


def load_dcc_json(path) -> DccParams:
    with open(path, encoding="utf-8") as fh:
        return dcc_params_from_dict(json.load(fh))


def save_correlations_csv(path, dates, entities, r_series):
    """Long-format export: one row per date and unordered entity pair."""
    R = np.asarray(r_series, dtype=float)
    k = len(entities)
    rows = []
    for t, date in enumerate(dates):
        for i in range(k):
            for j in range(i + 1, k):
                rows.append((date.isoformat(), entities[i], entities[j],
                             float(R[t, i, j])))
    write_csv(path, ["date", "entity_a", "entity_b", "rho"], rows,
              column_types=["date", "string", "string", "float"],
              description="Conditional correlations per week and entity pair.")


def load_correlations_csv(path):
    """Rebuild (dates, entities, r_series) from a long-format export."""
    header, rows = read_csv(path)
    if header != ["date", "entity_a", "entity_b", "rho"]:
        raise ValidationError(f"unexpected correlation table header {header}")
    dates = []
    entities: list[str] = []
    seen = {}
    for date_s, a, b, _ in rows:
        if not dates or dates[-1] != date_s:
            if date_s in seen:
                raise ValidationError("correlation table dates are not grouped")
            seen[date_s] = True
            dates.append(date_s)
        if a not in entities:
            entities.append(a)
        if b not in entities:
            entities.append(b)
    k = len(entities)
    idx = {e: i for i, e in enumerate(entities)}
    date_idx = {s: t for t, s in enumerate(dates)}
    R = np.full((len(dates), k, k), np.nan)
    R[:, np.arange(k), np.arange(k)] = 1.0
    for date_s, a, b, rho_s in rows:
        t, i, j = date_idx[date_s], idx[a], idx[b]
        rho = float(rho_s)
        R[t, i, j] = rho
        R[t, j, i] = rho
    if np.any(np.isnan(R)):
        raise ValidationError("correlation table is missing entity pairs")
    return [dt.date.fromisoformat(s) for s in dates], entities, R
