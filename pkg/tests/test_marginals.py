"""Conditional mean/variance filters against scalar-loop oracles, parameter
containers, likelihood, estimation, and serialization."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import abs_moment_oracle, arma_oracle, egarch_oracle
from risknet.distributions import std_t_logpdf
from risknet.errors import (DomainError, EstimationError, NumericalError,
                            ValidationError)
from risknet.marginals import (ArmaParams, EgarchParams, MarginalModel,
                               arma_filter, egarch_filter, filter_loglik,
                               fit_marginal, marginal_from_dict,
                               marginal_to_dict, standardize)


def random_returns(rng, n):
    return rng.normal(0.0005, 0.02, n)


# --- parameter containers ---


def test_arma_params_orders():
    p = ArmaParams(0.001, (0.3, 0.1), (0.2,))
    assert p.p == 2 and p.q == 1


def test_arma_params_rejects_nonfinite():
    with pytest.raises(ValidationError):
        ArmaParams(math.nan, (), ())
    with pytest.raises(ValidationError):
        ArmaParams(0.0, (math.inf,), ())


def test_egarch_params_shape_checks():
    with pytest.raises(ValidationError):
        EgarchParams(omega=0.0, alpha=(0.1,), gamma=(0.1, 0.2), beta=(0.9,), nu=8)
    with pytest.raises(ValidationError):
        EgarchParams(omega=0.0, alpha=(0.1,), gamma=(0.1,), beta=(0.9,), nu=2.0)


def test_egarch_stationarity_flag_not_enforced_at_construction():
    p = EgarchParams(omega=0.0, alpha=(0.0,), gamma=(0.0,), beta=(1.0,), nu=8)
    assert not p.is_stationary()
    q = EgarchParams(omega=0.0, alpha=(0.0,), gamma=(0.0,), beta=(0.9,), nu=8)
    assert q.is_stationary()


# --- ARMA filter ---


def test_arma_zero_params_mean_is_constant():
    r = np.array([0.01, -0.02, 0.005, 0.0, 0.003])
    mu, y = arma_filter(ArmaParams(0.002, (), ()), r)
    assert np.allclose(mu, 0.002)
    assert np.allclose(y, r - 0.002)


def test_arma_matches_oracle_ar2_ma1():
    rng = np.random.default_rng(0)
    r = random_returns(rng, 80)
    params = ArmaParams(0.001, (0.4, -0.2), (0.3,))
    mu, y = arma_filter(params, r)
    mu_o, y_o = arma_oracle(0.001, [0.4, -0.2], [0.3], r)
    np.testing.assert_allclose(mu, mu_o, atol=1e-12, rtol=0)
    np.testing.assert_allclose(y, y_o, atol=1e-12, rtol=0)


def test_arma_presample_override_order():
    # presample in time order: last element is the value just before t=0
    rng = np.random.default_rng(1)
    r = random_returns(rng, 30)
    params = ArmaParams(0.0, (0.5, 0.25), ())
    pre = [0.011, 0.022]  # r_{-2}=0.011, r_{-1}=0.022
    mu, _ = arma_filter(params, r, presample_returns=pre)
    # t=0: mu = 0.5*r_{-1} + 0.25*r_{-2}
    assert mu[0] == pytest.approx(0.5 * 0.022 + 0.25 * 0.011, abs=1e-15)
    mu_o, _ = arma_oracle(0.0, [0.5, 0.25], [], r, pre_returns=pre)
    np.testing.assert_allclose(mu, mu_o, atol=1e-12, rtol=0)


def test_arma_default_presample_is_sample_mean():
    r = np.array([0.02, 0.04, 0.0, -0.02, 0.01])
    params = ArmaParams(0.0, (0.5,), ())
    mu, _ = arma_filter(params, r)
    assert mu[0] == pytest.approx(0.5 * r.mean(), abs=1e-15)


def test_arma_nonstationary_rejected():
    r = np.zeros(10) + 0.01
    with pytest.raises(DomainError):
        arma_filter(ArmaParams(0.0, (1.01,), ()), r)


def test_arma_noninvertible_ma_rejected():
    r = np.zeros(10) + 0.01
    with pytest.raises(DomainError):
        arma_filter(ArmaParams(0.0, (), (1.2,)), r)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1),
       st.integers(min_value=0, max_value=2),
       st.integers(min_value=0, max_value=2))
def test_arma_matches_oracle_random(seed, p, q):
    rng = np.random.default_rng(seed)
    r = random_returns(rng, int(rng.integers(10, 100)))
    ar = tuple(rng.uniform(-0.3, 0.3, p))
    ma = tuple(rng.uniform(-0.3, 0.3, q))
    params = ArmaParams(float(rng.normal(0, 0.002)), ar, ma)
    mu, y = arma_filter(params, r)
    mu_o, y_o = arma_oracle(params.mu0, ar, ma, r)
    np.testing.assert_allclose(mu, mu_o, atol=1e-12, rtol=0)
    np.testing.assert_allclose(y, y_o, atol=1e-12, rtol=0)


# --- eGARCH filter ---


def test_egarch_constant_when_flat():
    # alpha=gamma=0, beta=0: log h_t = omega for all t
    y = np.array([0.01, -0.03, 0.02, 0.0, 0.015])
    params = EgarchParams(omega=-8.0, alpha=(0.0,), gamma=(0.0,), beta=(0.0,), nu=8)
    h = egarch_filter(params, y)
    np.testing.assert_allclose(h, math.exp(-8.0), rtol=1e-15)


def test_egarch_random_walk_beta_one_runs():
    # the permissive construction must filter beta = [1]
    y = np.array([0.01, -0.01, 0.02, -0.02])
    params = EgarchParams(omega=0.0, alpha=(0.0,), gamma=(0.0,), beta=(1.0,), nu=8)
    h = egarch_filter(params, y)
    # log h stays at the pre-sample level: log(sample var), no drift
    lh0 = math.log(np.var(y, ddof=1))
    np.testing.assert_allclose(np.log(h), lh0, rtol=1e-12)


def test_egarch_presample_log_variance_is_sample_variance_ddof1():
    y = np.array([0.03, -0.01, 0.005, -0.02, 0.01])
    params = EgarchParams(omega=0.0, alpha=(0.0,), gamma=(0.0,), beta=(0.5,), nu=8)
    h = egarch_filter(params, y)
    assert math.log(h[0]) == pytest.approx(0.5 * math.log(np.var(y, ddof=1)),
                                           abs=1e-12)


def test_egarch_matches_oracle():
    rng = np.random.default_rng(3)
    y = rng.normal(0, 0.02, 60)
    params = EgarchParams(omega=-0.5, alpha=(-0.08,), gamma=(0.15,),
                          beta=(0.92,), nu=6.0)
    h = egarch_filter(params, y)
    h_o = egarch_oracle(-0.5, [-0.08], [0.15], [0.92], 6.0, y)
    np.testing.assert_allclose(h, h_o, atol=1e-12, rtol=1e-12)


def test_egarch_matches_oracle_higher_order():
    rng = np.random.default_rng(4)
    y = rng.normal(0, 0.01, 50)
    params = EgarchParams(omega=-0.3, alpha=(-0.05, 0.02), gamma=(0.1, 0.05),
                          beta=(0.5, 0.3), nu=9.0)
    h = egarch_filter(params, y)
    h_o = egarch_oracle(-0.3, [-0.05, 0.02], [0.1, 0.05], [0.5, 0.3], 9.0, y)
    np.testing.assert_allclose(h, h_o, atol=1e-12, rtol=1e-12)


def test_egarch_overflow_raises_with_index():
    y = np.full(20, 0.01)
    params = EgarchParams(omega=100.0, alpha=(0.0,), gamma=(0.0,),
                          beta=(8.0,), nu=8.0)
    with pytest.raises(NumericalError, match="index"):
        egarch_filter(params, y)


def test_abs_moment_used_matches_formula():
    nu = 7.0
    y = np.array([0.02, -0.01, 0.015, -0.025, 0.005])
    mom = abs_moment_oracle(nu)
    # one-step effect: log h_1 = omega + alpha*eps_0 + gamma*(|eps_0| - mom)
    params = EgarchParams(omega=-7.0, alpha=(0.2,), gamma=(0.3,), beta=(0.0,),
                          nu=nu)
    h = egarch_filter(params, y)
    eps0 = y[0] / math.sqrt(h[0])
    expect = -7.0 + 0.2 * eps0 + 0.3 * (abs(eps0) - mom)
    assert math.log(h[1]) == pytest.approx(expect, abs=1e-12)


# --- joint likelihood ---


def test_filter_loglik_formula():
    rng = np.random.default_rng(5)
    r = random_returns(rng, 40)
    arma = ArmaParams(0.001, (0.1,), ())
    eg = EgarchParams(omega=-7.5, alpha=(-0.05,), gamma=(0.1,), beta=(0.1,),
                      nu=8.0)
    ll, mu, h, eps = filter_loglik(arma, eg, r)
    direct = sum(std_t_logpdf(e, 8.0) - 0.5 * math.log(hv)
                 for e, hv in zip(eps, h))
    assert ll == pytest.approx(direct, rel=1e-12)


# --- estimation ---


def test_fit_marginal_below_floor():
    with pytest.raises(EstimationError):
        fit_marginal(np.random.default_rng(0).normal(0, 0.01, 50), (1, 0, 1, 1))


def test_fit_marginal_zero_variance():
    with pytest.raises(EstimationError, match="variance"):
        fit_marginal(np.zeros(300), (1, 0, 1, 1), min_obs=200)


def test_fit_marginal_recovers_volatility_level():
    # short-sample smoke: the unconditional variance level must be right
    from risknet.simulate import hub_market_spec, simulate_panel
    spec = hub_market_spec(5, 0.8, 0.3, seed=21, n_weeks=500)
    _, truth = simulate_panel(spec)
    r = truth.returns[:, 2]
    model = fit_marginal(r, (1, 0, 1, 1), min_obs=200)
    # unconditional log-variance: omega / (1 - beta); truth: -0.7/0.1 = -7
    est = model.egarch.omega / (1.0 - sum(model.egarch.beta))
    assert est == pytest.approx(-7.0, abs=0.7)
    assert model.diagnostics["converged"]
    assert model.loglik > 0  # weekly-return scale makes densities > 1


def test_standardize_produces_uniforms():
    rng = np.random.default_rng(6)
    r = random_returns(rng, 400)
    model = fit_marginal(r, (1, 0, 1, 1), min_obs=200)
    u = standardize(model)
    assert u.shape == r.shape
    assert np.all((u > 0) & (u < 1))
    # roughly uniform
    assert abs(u.mean() - 0.5) < 0.08


# --- serialization ---


def test_marginal_roundtrip_json(tmp_path):
    rng = np.random.default_rng(7)
    r = random_returns(rng, 300)
    model = fit_marginal(r, (1, 0, 1, 1), min_obs=200)
    d = marginal_to_dict(model)
    clone = marginal_from_dict(json.loads(json.dumps(d)))
    assert clone.arma == model.arma
    assert clone.egarch == model.egarch
    np.testing.assert_array_equal(clone.cond_var, model.cond_var)
    np.testing.assert_array_equal(clone.std_resid, model.std_resid)
    assert clone.loglik == model.loglik
