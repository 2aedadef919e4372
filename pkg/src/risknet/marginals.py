"""ARMA conditional mean and eGARCH conditional variance with Student-t shocks.

The conditional mean follows

    mu_t = mu0 + sum_j ar[j] * r_{t-1-j} + sum_j ma[j] * y_{t-1-j}

with innovations y_t = r_t - mu_t, and the log conditional variance follows

    log h_t = omega + sum_j (alpha[j] * e_{t-1-j}
                             + gamma[j] * (|e_{t-1-j}| - E|e|))
                    + sum_j beta[j] * log h_{t-1-j}

where e_t = y_t / sqrt(h_t) are the standardized shocks, alpha carries the
sign (leverage) response and gamma the magnitude response, and E|e| is the
absolute first moment of the standardized Student-t with the model's nu.

Pre-sample conventions, all overridable: the mean recursion sees the sample
mean of the returns in place of unobserved returns and zeros in place of
unobserved innovations; the variance recursion sees the log sample variance
(ddof=1) of the innovations in place of unobserved log h, and the pre-sample
shock terms are taken as zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit

from . import _optim
from .distributions import std_t_abs_moment, std_t_cdf, std_t_logpdf
from .errors import DomainError, EstimationError, NumericalError, ValidationError
from .validation import check_series

NU_LOW = 2.1
NU_HIGH = 100.0

_LOGH_LIMIT = 700.0  # |log h| beyond this over/underflows exp in double precision


def _roots_inside(poly_tail) -> bool:
    """True if every root of 1 + c_1 z + ... + c_n z^n lies outside the unit circle."""
    c = np.asarray(poly_tail, dtype=float)
    if c.size == 0 or not np.any(c):
        return True
    roots = np.roots(np.concatenate((c[::-1], [1.0])))
    return roots.size == 0 or bool(np.min(np.abs(roots)) > 1.0)


def arma_is_stationary(ar) -> bool:
    return _roots_inside(-np.asarray(ar, dtype=float))


def ma_is_invertible(ma) -> bool:
    return _roots_inside(np.asarray(ma, dtype=float))


@dataclass(frozen=True)
class ArmaParams:
    """Conditional-mean parameters: intercept, AR and MA coefficients."""

    mu0: float
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))
        object.__setattr__(self, "mu0", float(self.mu0))
        values = (self.mu0,) + self.ar + self.ma
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("mean parameters must be finite")

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)


@dataclass(frozen=True)
class EgarchParams:
    """Log-variance parameters; alpha and gamma pair up one per shock lag."""

    omega: float
    alpha: tuple[float, ...]
    gamma: tuple[float, ...]
    beta: tuple[float, ...]
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "nu", float(self.nu))
        if len(self.alpha) != len(self.gamma):
            raise ValidationError("alpha and gamma must have one entry per shock lag")
        values = (self.omega, self.nu) + self.alpha + self.gamma + self.beta
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("variance parameters must be finite")
        if self.nu <= 2.0:
            raise ValidationError(f"nu must exceed 2, got {self.nu}")

    @property
    def r(self) -> int:
        return len(self.alpha)

    @property
    def s(self) -> int:
        return len(self.beta)

    def is_stationary(self) -> bool:
        """Strict persistence check: sum of beta inside (-1, 1)."""
        return -1.0 < sum(self.beta) < 1.0


@dataclass(frozen=True)
class MarginalModel:
    """One entity's fitted mean/variance model plus its filtered series."""

    arma: ArmaParams
    egarch: EgarchParams
    cond_mean: np.ndarray
    cond_var: np.ndarray
    std_resid: np.ndarray
    loglik: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("cond_mean", "cond_var", "std_resid"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.cond_mean.shape[0]
        if self.cond_var.shape != (n,) or self.std_resid.shape != (n,):
            raise ValidationError("fitted series must share one length")
        if not np.all(self.cond_var > 0.0):
            raise ValidationError("conditional variances must be strictly positive")

    @property
    def orders(self) -> tuple[int, int, int, int]:
        return (self.arma.p, self.arma.q, self.egarch.r, self.egarch.s)


def arma_filter(params: ArmaParams, returns, presample_returns=None,
                presample_innovations=None):
    """Run the conditional-mean recursion; returns ``(cond_mean, innovations)``.

    ``presample_returns`` / ``presample_innovations`` replace the default
    pre-sample values (sample mean of ``returns`` and zeros) and are given in
    time order, the last element being the value just before the first
    observation.
    """
    r = check_series(returns, min_len=max(params.p, params.q) + 1, name="returns")
    T = r.shape[0]
    p, q = params.p, params.q

    if not arma_is_stationary(params.ar):
        raise DomainError(f"AR coefficients {params.ar} are not stationary")
    if not ma_is_invertible(params.ma):
        raise DomainError(f"MA coefficients {params.ma} are not invertible")

    if presample_returns is None:
        pre_r = [float(np.mean(r))] * p
    else:
        pre_r = [float(v) for v in presample_returns]
        if len(pre_r) != p:
            raise ValidationError(f"expected {p} pre-sample returns, got {len(pre_r)}")
    if presample_innovations is None:
        pre_y = [0.0] * q
    else:
        pre_y = [float(v) for v in presample_innovations]
        if len(pre_y) != q:
            raise ValidationError(
                f"expected {q} pre-sample innovations, got {len(pre_y)}"
            )

    if q == 0:
        # No innovation feedback: the recursion is a pure lag polynomial in
        # the returns and vectorizes exactly (same accumulation order as the
        # scalar loop).
        mu = np.full(T, params.mu0)
        if p:
            rpad = np.concatenate((pre_r, r))
            for j, phi in enumerate(params.ar, start=1):
                mu = mu + phi * rpad[p - j:p - j + T]
        y = r - mu
        return mu, y

    rv = r.tolist()
    rpad = pre_r + rv
    ypad = pre_y + [0.0] * T
    mu = np.empty(T)
    ar, ma, mu0 = params.ar, params.ma, params.mu0
    for t in range(T):
        m = mu0
        for j in range(p):
            m += ar[j] * rpad[p + t - 1 - j]
        for j in range(q):
            m += ma[j] * ypad[q + t - 1 - j]
        mu[t] = m
        ypad[q + t] = rv[t] - m
    return mu, np.asarray(ypad[q:], dtype=float)


def egarch_filter(params: EgarchParams, innovations, presample_log_variance=None):
    """Run the log-variance recursion; returns the conditional variance series.

    Standardized shocks are formed causally as e_t = y_t / sqrt(h_t).  The
    pre-sample log-variance defaults to the log sample variance (ddof=1) of
    the innovations; pre-sample shock terms contribute zero.
    """
    y = check_series(innovations, min_len=1, name="innovations")
    T = y.shape[0]
    r_ord, s_ord = params.r, params.s

    if presample_log_variance is None:
        if T < 2:
            raise ValidationError("need at least 2 innovations to seed the recursion")
        v0 = float(np.var(y, ddof=1))
        if v0 <= 0.0:
            raise ValidationError("innovations have zero sample variance")
        lh0 = math.log(v0)
        pre_lh = [lh0] * s_ord
    else:
        pre_lh = [float(v) for v in presample_log_variance]
        if len(pre_lh) != s_ord:
            raise ValidationError(
                f"expected {s_ord} pre-sample log-variances, got {len(pre_lh)}"
            )

    e_abs = std_t_abs_moment(params.nu)
    omega, alpha, gamma, beta = params.omega, params.alpha, params.gamma, params.beta
    yv = y.tolist()
    epad = [0.0] * (r_ord + T)   # standardized shocks, zero pre-sample
    apad = [0.0] * (r_ord + T)   # |e| - E|e| terms, zero pre-sample
    lhpad = pre_lh + [0.0] * T
    h = np.empty(T)
    for t in range(T):
        x = omega
        for j in range(r_ord):
            x += alpha[j] * epad[r_ord + t - 1 - j] + gamma[j] * apad[r_ord + t - 1 - j]
        for j in range(s_ord):
            x += beta[j] * lhpad[s_ord + t - 1 - j]
        if x > _LOGH_LIMIT or x < -_LOGH_LIMIT:
            raise NumericalError("conditional log-variance overflow", index=t)
        lhpad[s_ord + t] = x
        ht = math.exp(x)
        h[t] = ht
        e = yv[t] / math.sqrt(ht)
        epad[r_ord + t] = e
        apad[r_ord + t] = abs(e) - e_abs
    return h


def filter_loglik(arma: ArmaParams, egarch: EgarchParams, returns,
                  presample_returns=None, presample_innovations=None,
                  presample_log_variance=None):
    """Student-t log-likelihood of the returns under both filters.

    Returns ``(loglik, cond_mean, cond_var, std_resid)``.
    """
    mu, y = arma_filter(arma, returns, presample_returns, presample_innovations)
    h = egarch_filter(egarch, y, presample_log_variance)
    eps = y / np.sqrt(h)
    ll = float(np.sum(std_t_logpdf(eps, egarch.nu)) - 0.5 * np.sum(np.log(h)))
    return ll, mu, h, eps


# --- parameter transforms -------------------------------------------------
#
# The optimizer works in an unconstrained space: AR and MA coefficients are
# parametrized through partial autocorrelations in (-1, 1) (tanh image,
# mapped by the Levinson recursion, which is a bijection onto the
# stationary/invertible region), each beta through tanh(x)/s so the betas sum
# strictly inside (-1, 1), and nu through a scaled logistic into
# (NU_LOW, NU_HIGH).  mu0, omega, alpha and gamma are unconstrained.


def _pacf_to_ar(pacf):
    a: list[float] = []
    for k, pk in enumerate(pacf):
        new = [a[j] - pk * a[k - 1 - j] for j in range(k)]
        new.append(pk)
        a = new
    return a


def _ar_to_pacf(ar):
    a = [float(v) for v in ar]
    pacf: list[float] = []
    for k in range(len(a), 0, -1):
        pk = a[k - 1]
        pacf.append(pk)
        if abs(pk) >= 1.0:
            raise DomainError("coefficients outside the stationary region")
        denom = 1.0 - pk * pk
        a = [(a[j] + pk * a[k - 2 - j]) / denom for j in range(k - 1)]
    return pacf[::-1]


def _nu_from_raw(x: float) -> float:
    return NU_LOW + (NU_HIGH - NU_LOW) * float(expit(x))


def _nu_to_raw(nu: float) -> float:
    frac = (nu - NU_LOW) / (NU_HIGH - NU_LOW)
    frac = min(max(frac, 1e-12), 1.0 - 1e-12)
    return float(logit(frac))


def _unpack(x, orders):
    p, q, r, s = orders
    x = [float(v) for v in x]
    i = 0
    mu0 = x[i]; i += 1
    ar = tuple(_pacf_to_ar([math.tanh(v) for v in x[i:i + p]])); i += p
    ma = tuple(-a for a in _pacf_to_ar([math.tanh(v) for v in x[i:i + q]])); i += q
    omega = x[i]; i += 1
    alpha = tuple(x[i:i + r]); i += r
    gamma = tuple(x[i:i + r]); i += r
    beta = tuple(math.tanh(v) / s for v in x[i:i + s]); i += s
    nu = _nu_from_raw(x[i]); i += 1
    return ArmaParams(mu0, ar, ma), EgarchParams(omega, alpha, gamma, beta, nu)


def _pack(arma: ArmaParams, egarch: EgarchParams):
    s = egarch.s
    x = [arma.mu0]
    x += [math.atanh(v) for v in _ar_to_pacf(arma.ar)]
    x += [math.atanh(v) for v in _ar_to_pacf([-t for t in arma.ma])]
    x.append(egarch.omega)
    x += list(egarch.alpha)
    x += list(egarch.gamma)
    x += [math.atanh(min(max(v * s, -1 + 1e-12), 1 - 1e-12)) for v in egarch.beta]
    x.append(_nu_to_raw(egarch.nu))
    return np.asarray(x, dtype=float)


def fit_marginal(returns, orders=(1, 0, 1, 1), min_obs=200, start=None):
    """Fit the mean/variance model by maximum likelihood.

    ``orders`` is ``(p, q, r, s)``: AR and MA lags of the mean, shock and
    persistence lags of the log-variance.  ``start`` optionally supplies an
    ``(ArmaParams, EgarchParams)`` pair as the base initial point.  Raises
    ``EstimationError`` when the series is shorter than ``min_obs`` or no
    optimizer pass converges; the error carries the best parameters found.
    """
    r = check_series(returns, min_len=2, name="returns")
    T = r.shape[0]
    if T < min_obs:
        raise EstimationError(
            f"need at least {min_obs} observations to fit, got {T}"
        )
    p, q, r_ord, s_ord = orders
    if min(p, q, r_ord, s_ord) < 0 or s_ord == 0:
        raise ValidationError(f"bad orders {orders}: need non-negative, s >= 1")

    if start is not None:
        x0 = _pack(start[0], start[1])
    else:
        var_r = float(np.var(r, ddof=1))
        if var_r <= 0.0:
            raise EstimationError("returns have zero variance")
        x0 = _pack(
            ArmaParams(float(np.mean(r)), (0.0,) * p, (0.0,) * q),
            EgarchParams(0.1 * math.log(var_r), (0.0,) * r_ord,
                         (0.1,) * r_ord, (0.9 / s_ord,) * s_ord, 8.0),
        )

    def objective(x):
        try:
            arma, egarch = _unpack(x, orders)
            ll, _, _, _ = filter_loglik(arma, egarch, r)
        except (NumericalError, DomainError, ValidationError, OverflowError):
            return -np.inf
        return ll

    x_best, ll, diag = _optim.maximize(objective, x0)
    arma, egarch = _unpack(x_best, orders)
    if not diag["converged"]:
        raise EstimationError(
            "likelihood maximization did not converge",
            best_params={"arma": arma, "egarch": egarch},
            diagnostics=diag,
        )
    ll, mu, h, eps = filter_loglik(arma, egarch, r)
    return MarginalModel(arma=arma, egarch=egarch, cond_mean=mu, cond_var=h,
                         std_resid=eps, loglik=ll, diagnostics=diag)


def standardize(model: MarginalModel):
    """Probability-integral transform of the standardized residuals.

    Maps each residual through the standardized Student-t CDF at the model's
    nu; every output lies strictly inside (0, 1).
    """
    u = std_t_cdf(model.std_resid, model.egarch.nu)
    if not (np.all(u > 0.0) and np.all(u < 1.0)):
        idx = int(np.argmax((u <= 0.0) | (u >= 1.0)))
        raise NumericalError("probability-integral transform left (0, 1)", index=idx)
    return u


# --- serialization --------------------------------------------------------


def marginal_to_dict(model: MarginalModel, include_series=True) -> dict:
    d = {
        "arma": {"mu0": model.arma.mu0, "ar": list(model.arma.ar),
                 "ma": list(model.arma.ma)},
        "egarch": {"omega": model.egarch.omega, "alpha": list(model.egarch.alpha),
                   "gamma": list(model.egarch.gamma), "beta": list(model.egarch.beta),
                   "nu": model.egarch.nu},
        "orders": list(model.orders),
        "loglik": model.loglik,
        "diagnostics": model.diagnostics,
    }
    if include_series:
        d["series"] = {
            "cond_mean": model.cond_mean.tolist(),
            "cond_var": model.cond_var.tolist(),
            "std_resid": model.std_resid.tolist(),
        }
    return d


def marginal_from_dict(d: dict) -> MarginalModel:
    arma = ArmaParams(d["arma"]["mu0"], tuple(d["arma"]["ar"]), tuple(d["arma"]["ma"]))
    eg = d["egarch"]
    egarch = EgarchParams(eg["omega"], tuple(eg["alpha"]), tuple(eg["gamma"]),
                          tuple(eg["beta"]), eg["nu"])
    if "series" not in d:
        raise ValidationError("serialized model is missing its filtered series")
    s = d["series"]
    return MarginalModel(arma=arma, egarch=egarch,
                         cond_mean=np.asarray(s["cond_mean"], dtype=float),
                         cond_var=np.asarray(s["cond_var"], dtype=float),
                         std_resid=np.asarray(s["std_resid"], dtype=float),
                         loglik=float(d["loglik"]),
                         diagnostics=dict(d.get("diagnostics", {})))


def save_marginals_json(models, path, entities=None):
    """Write fitted models to JSON keyed by entity name (or column index)."""
    if entities is None:
        entities = [str(i) for i in range(len(models))]
    payload = {e: marginal_to_dict(m) for e, m in zip(entities, models)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def load_marginals_json(path):
    """Read models written by :func:`save_marginals_json`; returns (entities, models)."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    entities = list(payload)
    return entities, [marginal_from_dict(payload[e]) for e in entities]
