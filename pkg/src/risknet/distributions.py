"""Student-t helpers used by the marginal models and the copula.

Two parametrizations appear throughout:

* the *classic* t distribution with ``nu`` degrees of freedom (variance
  nu/(nu-2)), which is what the elliptical copula machinery works in, and
* the *standardized* t, rescaled to unit variance, which is the innovation
  law of the volatility models.

Both need nu > 2.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special


def _check_nu(nu: float) -> None:
    if not nu > 2.0:
        raise ValueError(f"degrees of freedom must exceed 2, got {nu}")


def t_cdf(x, nu: float):
    """CDF of the classic Student-t."""
    _check_nu(nu)
    return special.stdtr(nu, x)


def t_ppf(u, nu: float):
    """Quantile of the classic Student-t."""
    _check_nu(nu)
    return special.stdtrit(nu, u)


def t_logpdf(x, nu: float):
    """Log density of the classic Student-t."""
    _check_nu(nu)
    c = special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu) \
        - 0.5 * math.log(nu * math.pi)
    return c - 0.5 * (nu + 1.0) * np.log1p(np.asarray(x) ** 2 / nu)


def std_t_scale(nu: float) -> float:
    """sqrt(nu/(nu-2)): multiply a standardized variate to get a classic one."""
    _check_nu(nu)
    return math.sqrt(nu / (nu - 2.0))


def std_t_cdf(x, nu: float):
    """CDF of the unit-variance Student-t."""
    return t_cdf(np.asarray(x) * std_t_scale(nu), nu)


def std_t_ppf(u, nu: float):
    """Quantile of the unit-variance Student-t."""
    return t_ppf(u, nu) / std_t_scale(nu)


def std_t_logpdf(x, nu: float):
    """Log density of the unit-variance Student-t."""
    _check_nu(nu)
    c = special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu) \
        - 0.5 * math.log((nu - 2.0) * math.pi)
    return c - 0.5 * (nu + 1.0) * np.log1p(np.asarray(x) ** 2 / (nu - 2.0))


def std_t_abs_moment(nu: float) -> float:
    """E|X| for the unit-variance Student-t.

    Closed form: 2 * sqrt(nu-2) * Gamma((nu+1)/2) / (sqrt(pi) * (nu-1) * Gamma(nu/2)).
    """
    _check_nu(nu)
    log_m = (math.log(2.0) + 0.5 * math.log(nu - 2.0)
             + special.gammaln(0.5 * (nu + 1.0))
             - 0.5 * math.log(math.pi) - math.log(nu - 1.0)
             - special.gammaln(0.5 * nu))
    return math.exp(log_m)
