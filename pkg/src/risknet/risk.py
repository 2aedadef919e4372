"""VaR and copula-based CoVaR / delta-CoVaR against a sector index.

The conditional quantile solves, in uniform space,

    C(u, a) = a * beta,       a = conditioning level,

where C is the dependence copula between the sector return and the
conditioning institution: the left side is the joint probability that the
sector sits below its u-quantile while the institution sits below its
a-quantile, so dividing by a makes u the beta-quantile of the sector
conditional on the institution's tail event.  The stressed branch uses
a = alpha (institution at or below its VaR), the normal branch a = 0.5
(institution at or below its median), and delta-CoVaR is their difference in
return space — negative whenever the dependence is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import brentq

from .copula import t_copula_cdf, t_copula_conditional
from .dcc import dcc_filter, fit_dcc
from .distributions import std_t_ppf
from .errors import (DomainError, EstimationError, NumericalError, RisknetError,
                     SolverError, ValidationError)
from .marginals import MarginalModel, fit_marginal, standardize
from .panel import ReturnPanel
from .tableio import write_csv

_U_FLOOR = 1e-12


@dataclass(frozen=True)
class QuantileLevels:
    """Tail levels: alpha for the conditioning entity, beta for the quantile."""

    alpha: float = 0.05
    beta: float = 0.05

    def __post_init__(self):
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 < float(value) <= 0.5:
                raise ValidationError(f"{name} must lie in (0, 0.5], got {value}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


class CovarBreakdown(NamedTuple):
    covar_stress: float
    covar_median: float
    delta_covar: float


@dataclass(frozen=True)
class RiskSeries:
    """Per-entity weekly VaR, conditional quantiles and their difference."""

    entity: str
    dates: tuple
    var_i: np.ndarray
    covar_stress: np.ndarray
    covar_median: np.ndarray
    delta_covar: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arrays = {}
        for name in ("var_i", "covar_stress", "covar_median", "delta_covar"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            arrays[name] = arr
        n = len(self.dates)
        if any(a.shape != (n,) for a in arrays.values()):
            raise ValidationError("risk series lengths must match the dates")
        if not np.array_equal(self.delta_covar,
                              self.covar_stress - self.covar_median):
            raise ValidationError("delta series must equal stress minus median")


def var_quantile(model: MarginalModel, level: float, week: int) -> float:
    """Week's return quantile: mu + sqrt(h) times the standardized-t quantile."""
    level = float(level)
    if not 0.0 < level < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {level}")
    n = model.cond_mean.shape[0]
    if not 0 <= week < n:
        raise ValidationError(f"week {week} outside fitted range [0, {n})")
    q = std_t_ppf(level, model.egarch.nu)
    return float(model.cond_mean[week]
                 + math.sqrt(model.cond_var[week]) * q)


def solve_conditional_quantile(cond_level: float, beta: float,
                               copula_cdf, copula_conditional=None,
                               u_start=None) -> float:
    """Solve C(u, cond_level) = cond_level * beta for u to 1e-8 or better.

    Newton steps with the conditional distribution as the exact derivative
    when available, warm-startable via ``u_start``; falls back to a bracketed
    Brent search with doubling expansion of the upper end.  Raises
    ``SolverError`` when no bracket exists.
    """
    a = float(cond_level)
    beta = float(beta)
    if not 0.0 < a <= 1.0:
        raise DomainError(f"conditioning level must lie in (0, 1], got {a}")
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if a == 1.0:
        return beta  # C(u, 1) = u: conditioning on a sure event changes nothing
    target = a * beta

    # C(u, a) <= u pins the root above the target; positive dependence pins
    # it below beta, so this is a good cold start.
    u = float(u_start) if u_start is not None else 0.5 * beta * (1.0 + a)
    u = min(max(u, target), 1.0 - _U_FLOOR)

    if copula_conditional is not None:
        for _ in range(40):
            f = copula_cdf(u, a) - target
            if abs(f) <= 3e-10:
                return u
            slope = copula_conditional(u, a)
            if not (math.isfinite(slope) and slope > 1e-14):
                break
            step = f / slope
            u_new = u - step
            if not target * (1.0 - 1e-9) <= u_new <= 1.0 - _U_FLOOR:
                break
            if abs(step) <= 1e-13 * max(u, 1e-8):
                return u_new
            u = u_new

    lo = min(_U_FLOOR, target / 2.0)
    if copula_cdf(lo, a) - target >= 0.0:
        raise SolverError(
            "conditional quantile not bracketed from below",
            diagnostics={"cond_level": a, "beta": beta, "lo": lo},
        )
    hi = a
    while copula_cdf(hi, a) - target < 0.0:
        if hi >= 1.0 - _U_FLOOR:
            raise SolverError(
                "conditional quantile not bracketed from above",
                diagnostics={"cond_level": a, "beta": beta, "hi": hi},
            )
        hi = min(2.0 * hi, 1.0 - _U_FLOOR)
    return float(brentq(lambda x: copula_cdf(x, a) - target, lo, hi,
                        xtol=1e-14, rtol=8.9e-16))


def covar_solve(copula_rho: float, copula_nu: float, marginal_j: MarginalModel,
                week: int, cond_level: float, beta: float,
                copula_cdf=None, copula_conditional=None, u_start=None) -> float:
    """Conditional quantile of entity j's return given the partner's tail event.

    With the default t copula, ``copula_rho``/``copula_nu`` parametrize the
    dependence; passing ``copula_cdf`` (and optionally its u-derivative
    ``copula_conditional``) overrides the copula entirely, which is how the
    closed-form reductions (independence, comonotone) are exercised.
    """
    if copula_cdf is None:
        copula_cdf = lambda u, v: t_copula_cdf(u, v, copula_rho, copula_nu)
        copula_conditional = lambda u, v: t_copula_conditional(
            u, v, copula_rho, copula_nu)
    u = solve_conditional_quantile(cond_level, beta, copula_cdf,
                                   copula_conditional, u_start=u_start)
    n = marginal_j.cond_mean.shape[0]
    if not 0 <= week < n:
        raise ValidationError(f"week {week} outside fitted range [0, {n})")
    return float(marginal_j.cond_mean[week]
                 + math.sqrt(marginal_j.cond_var[week])
                 * std_t_ppf(u, marginal_j.egarch.nu))


def delta_covar(copula_rho: float, copula_nu: float, marginal_j: MarginalModel,
                week: int, levels: QuantileLevels,
                copula_cdf=None, copula_conditional=None) -> CovarBreakdown:
    """Stress branch at cond_level=alpha, normal branch at cond_level=0.5."""
    stress = covar_solve(copula_rho, copula_nu, marginal_j, week,
                         levels.alpha, levels.beta, copula_cdf,
                         copula_conditional)
    median = covar_solve(copula_rho, copula_nu, marginal_j, week,
                         0.5, levels.beta, copula_cdf, copula_conditional)
    return CovarBreakdown(stress, median, stress - median)


def sector_index_returns(panel: ReturnPanel, exclude: str, weights=None):
    """Mean log-return of all entities but one; optional custom weights."""
    if exclude not in panel.entities:
        raise KeyError(f"unknown entity {exclude!r}")
    keep = [i for i, e in enumerate(panel.entities) if e != exclude]
    block = panel.returns[:, keep]
    if weights is None:
        return block.mean(axis=1)
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(keep),):
        raise ValidationError(
            f"expected {len(keep)} weights for the remaining entities, got {w.shape}"
        )
    if np.any(w < 0.0) or w.sum() <= 0.0:
        raise ValidationError("weights must be non-negative with positive sum")
    return block @ (w / w.sum())


def risk_series_for_entity(panel: ReturnPanel, entity: str, levels: QuantileLevels,
                           marginal_model: MarginalModel | None = None,
                           orders=(1, 0, 1, 1), dcc_orders=(1, 1),
                           min_obs=200) -> RiskSeries:
    """Full weekly risk series for one entity against its ex-entity sector index."""
    r_i = panel.column(entity)
    model_i = marginal_model if marginal_model is not None else fit_marginal(
        r_i, orders, min_obs=min_obs)
    r_sector = sector_index_returns(panel, exclude=entity)
    model_s = fit_marginal(r_sector, orders, min_obs=min_obs)

    shocks = np.column_stack([model_s.std_resid, model_i.std_resid])
    uniforms = np.column_stack([standardize(model_s), standardize(model_i)])
    pair = fit_dcc(shocks, dcc_orders, min_obs=min_obs, uniforms=uniforms)
    state = dcc_filter(pair, shocks, keep_q=False)
    rho_t = state.pair_series(0, 1)
    nu_c = pair.nu_copula

    T = rho_t.shape[0]
    var_i = np.empty(T)
    stress = np.empty(T)
    median = np.empty(T)
    u_stress = None
    u_median = None
    for t in range(T):
        var_i[t] = var_quantile(model_i, levels.alpha, t)
        cdf = lambda u, v, r=float(rho_t[t]): t_copula_cdf(u, v, r, nu_c)
        cond = lambda u, v, r=float(rho_t[t]): t_copula_conditional(u, v, r, nu_c)
        u_stress = solve_conditional_quantile(levels.alpha, levels.beta,
                                              cdf, cond, u_start=u_stress)
        u_median = solve_conditional_quantile(0.5, levels.beta,
                                              cdf, cond, u_start=u_median)
        scale = math.sqrt(model_s.cond_var[t])
        loc = model_s.cond_mean[t]
        stress[t] = loc + scale * std_t_ppf(u_stress, model_s.egarch.nu)
        median[t] = loc + scale * std_t_ppf(u_median, model_s.egarch.nu)

    return RiskSeries(
        entity=entity, dates=tuple(panel.dates), var_i=var_i,
        covar_stress=stress, covar_median=median,
        delta_covar=stress - median,
        meta={
            "sector_construction": "equal-weight mean excluding the entity",
            "dcc_c": list(pair.c), "dcc_d": list(pair.d),
            "nu_copula": nu_c, "levels": {"alpha": levels.alpha,
                                          "beta": levels.beta},
        },
    )


def risk_series_all(panel: ReturnPanel, levels: QuantileLevels,
                    marginal_models: dict | None = None,
                    orders=(1, 0, 1, 1), dcc_orders=(1, 1),
                    min_obs=200, n_jobs=1):
    """Risk series for every entity; failures collected, not raised.

    Returns ``(series_list, failures)`` where ``failures`` maps entity name
    to the error message that stopped it.
    """
    marginal_models = marginal_models or {}

    def one(entity):
        try:
            return entity, risk_series_for_entity(
                panel, entity, levels,
                marginal_model=marginal_models.get(entity),
                orders=orders, dcc_orders=dcc_orders, min_obs=min_obs), None
        except (RisknetError, np.linalg.LinAlgError) as exc:
            return entity, None, f"{type(exc).__name__}: {exc}"

    if n_jobs == 1:
        results = [one(e) for e in panel.entities]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(one)(e) for e in panel.entities)

    series = [s for _, s, err in results if err is None]
    failures = {e: err for e, _, err in results if err is not None}
    return series, failures


# --- exports ---------------------------------------------------------------


def save_risk_csv(path, series_list):
    """Long-format export: one row per (date, entity) with the four measures."""
    rows = []
    for s in series_list:
        for t, date in enumerate(s.dates):
            rows.append((date.isoformat(), s.entity, float(s.var_i[t]),
                         float(s.covar_stress[t]), float(s.covar_median[t]),
                         float(s.delta_covar[t])))
    write_csv(path,
              ["date", "entity", "var_i", "covar_stress", "covar_median",
               "delta_covar"],
              rows,
              column_types=["date", "string", "float", "float", "float",
                            "float"],
              description="Weekly VaR and conditional quantile measures per entity.")


def save_risk_summary_csv(path, series_list, labels):
    """Per-entity means of each measure, split by market-state label."""
    rows = []
    for s in series_list:
        if len(labels) != len(s.dates):
            raise ValidationError("one label per week is required")
        by_label: dict[str, list[int]] = {}
        for t, lab in enumerate(labels):
            by_label.setdefault(lab, []).append(t)
        for lab in sorted(by_label):
            idx = by_label[lab]
            rows.append((s.entity, lab, len(idx),
                         float(s.var_i[idx].mean()),
                         float(s.covar_stress[idx].mean()),
                         float(s.covar_median[idx].mean()),
                         float(s.delta_covar[idx].mean())))
    write_csv(path,
              ["entity", "label", "n_weeks", "mean_var_i", "mean_covar_stress",
               "mean_covar_median", "mean_delta_covar"],
              rows,
              column_types=["string", "string", "int", "float", "float",
                            "float", "float"],
              description="Per-entity mean risk measures by market-state label.")
