"""The fit/transform wrappers: sklearn protocol compliance, parameter
validation, and agreement with the functional fitters underneath."""

import numpy as np
import pytest
from sklearn.base import clone

from risknet.dcc import fit_dcc
from risknet.errors import ValidationError
from risknet.estimators import DccCorrelationModel, MarginalVolatilityModel
from risknet.marginals import fit_marginal
from risknet.simulate import hub_market_spec, simulate_panel


@pytest.fixture(scope="module")
def sim_returns():
    _, truth = simulate_panel(hub_market_spec(5, 0.8, 0.45, seed=51,
                                              n_weeks=300))
    return truth.returns


@pytest.fixture(scope="module")
def fitted_marginal(sim_returns):
    return MarginalVolatilityModel(min_obs=200).fit(sim_returns[:, :3])


# --- sklearn protocol ---


def test_get_params_round_trip():
    est = MarginalVolatilityModel(p=2, q=1, r=1, s=1, min_obs=250)
    assert est.get_params() == {"p": 2, "q": 1, "r": 1, "s": 1, "min_obs": 250}
    est2 = clone(est).set_params(p=1)
    assert est2.get_params()["p"] == 1
    assert est2.get_params()["min_obs"] == 250

    dcc = DccCorrelationModel(m=1, n=2, min_obs=300)
    assert clone(dcc).get_params() == {"m": 1, "n": 2, "min_obs": 300}


def test_unfitted_transform_raises(sim_returns):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        MarginalVolatilityModel().transform(sim_returns)
    with pytest.raises(NotFittedError):
        DccCorrelationModel().filter(sim_returns)


def test_parameter_validation_at_fit_time(sim_returns):
    with pytest.raises(ValidationError):
        MarginalVolatilityModel(p=-1).fit(sim_returns)
    with pytest.raises(ValidationError):
        MarginalVolatilityModel(r=0).fit(sim_returns)
    with pytest.raises(ValidationError):
        MarginalVolatilityModel(p=1.5).fit(sim_returns)
    with pytest.raises(ValidationError):
        DccCorrelationModel(m=0).fit(sim_returns)
    with pytest.raises(ValidationError):
        MarginalVolatilityModel(min_obs=3).fit(sim_returns)


def test_rejects_3d_input():
    with pytest.raises(ValidationError):
        MarginalVolatilityModel().fit(np.zeros((10, 2, 2)))


# --- marginal wrapper ---


def test_marginal_fit_matches_functional(fitted_marginal, sim_returns):
    est = fitted_marginal
    assert est.n_features_in_ == 3
    assert len(est.models_) == 3
    direct = fit_marginal(sim_returns[:, 0], (1, 0, 1, 1), min_obs=200)
    assert est.models_[0].arma == direct.arma
    assert est.models_[0].egarch == direct.egarch
    assert est.loglik_ == pytest.approx(
        sum(m.loglik for m in est.models_), rel=1e-15)


def test_marginal_transform_standardizes(fitted_marginal, sim_returns):
    Z = fitted_marginal.transform(sim_returns[:, :3])
    assert Z.shape == (300, 3)
    np.testing.assert_allclose(
        Z[:, 0],
        fitted_marginal.models_[0].std_resid, atol=1e-12)
    # near-unit scale on the training window
    assert 0.7 < Z.std(ddof=1) < 1.3


def test_marginal_transform_on_new_data(fitted_marginal, sim_returns):
    _, truth = simulate_panel(hub_market_spec(5, 0.8, 0.45, seed=52,
                                              n_weeks=120))
    Z = fitted_marginal.transform(truth.returns[:, :3])
    assert Z.shape == (120, 3)
    assert np.all(np.isfinite(Z))
    with pytest.raises(ValidationError):
        fitted_marginal.transform(truth.returns[:, :2])


def test_marginal_conditional_moments(fitted_marginal, sim_returns):
    mu, h = fitted_marginal.conditional_moments(sim_returns[:, :3])
    assert mu.shape == h.shape == (300, 3)
    assert np.all(h > 0.0)
    np.testing.assert_allclose(h[:, 1], fitted_marginal.models_[1].cond_var,
                               atol=1e-12)


def test_marginal_accepts_1d_series(sim_returns):
    est = MarginalVolatilityModel(min_obs=200).fit(sim_returns[:, 0])
    assert est.n_features_in_ == 1
    Z = est.transform(sim_returns[:, 0])
    assert Z.shape == (300, 1)


# --- correlation wrapper ---


def test_dcc_wrapper_matches_functional(fitted_marginal, sim_returns):
    Z = fitted_marginal.transform(sim_returns[:, :3])
    est = DccCorrelationModel(min_obs=200).fit(Z)
    direct = fit_dcc(Z, (1, 1), min_obs=200)
    assert est.params_.c == direct.c
    assert est.params_.d == direct.d
    assert est.params_.nu_copula == direct.nu_copula
    assert est.loglik_ == direct.diagnostics["loglik"]

    flat = est.transform(Z)
    assert flat.shape == (300, 3)
    state = est.filter(Z)
    np.testing.assert_array_equal(flat[:, 0], state.r_series[:, 0, 1])
    np.testing.assert_array_equal(flat[:, 1], state.r_series[:, 0, 2])
    np.testing.assert_array_equal(flat[:, 2], state.r_series[:, 1, 2])
    assert np.all(np.abs(flat) <= 1.0)

    with pytest.raises(ValidationError):
        est.filter(Z[:, :2])


def test_two_stage_composition(fitted_marginal, sim_returns):
    # the canonical two-step: standardize, then correlate
    Z = fitted_marginal.transform(sim_returns[:, :3])
    corr = DccCorrelationModel(min_obs=200).fit_transform(Z)
    assert corr.shape == (300, 3)
    assert np.all(np.isfinite(corr))
