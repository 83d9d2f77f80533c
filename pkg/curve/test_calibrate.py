from datetime import date, timedelta

import numpy as np
import pytest

from errors import ConvergenceError, InsufficientDataError, SingularMatrixError
from market.synthetic import synthesize_history
from spot.params import SpotParams

from .calibrate import PENALTY, FuturesSample, build_futures_sample, calibrate_mle, initial_guess, invert_factors, objective, rough_estimates
from .params import GabillonParams


def test_invert_factors():
    h = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert np.allclose(invert_factors(h @ np.array([2.0, -1.0]), h), [2.0, -1.0])
    with pytest.raises(SingularMatrixError):
        invert_factors(np.ones(3), np.ones((3, 2)))
    with pytest.raises(ValueError):
        invert_factors(np.ones(2), h)


def test_futures_sample(synthetic_history):
    year = synthetic_history.window(date(2007, 1, 1), date(2007, 12, 31))
    sample = build_futures_sample(year, n_maturities=12)
    assert (sample.n_obs, sample.n_maturities) == (364, 12)
    assert np.all(sample.tau > 0)
    assert np.allclose(sample.dt, 1 / 365)
    assert np.all(np.abs(sample.returns) < 0.5)
    with pytest.raises(InsufficientDataError):
        build_futures_sample(synthetic_history.window(date(2007, 1, 1), date(2007, 2, 19)))


def test_rough_estimates(synthetic_history):
    sigma_s, sigma_l, rho = rough_estimates(synthetic_history, horizon_years=1.5)
    assert 0.2 < sigma_s < 0.8
    assert 0.0 < sigma_l < sigma_s
    assert -1.0 <= rho <= 1.0
    guess = initial_guess(synthetic_history, horizon_years=1.5)
    assert guess.sigma_s == pytest.approx(sigma_s)
    assert (guess.mu1, guess.mu2, guess.lam) == (0.0, 0.0, 1.0)
    with pytest.raises(InsufficientDataError):
        rough_estimates(synthetic_history.window(date(2007, 1, 1), date(2007, 1, 31)))


def test_objective_rejects_invalid_parameters(synthetic_history):
    sample = build_futures_sample(synthetic_history.window(date(2007, 1, 1), date(2007, 6, 30)))
    assert objective(np.array([-1.0, 0.0, 0.0, 0.4, 0.2, 0.3]), sample) == PENALTY
    assert objective(np.array([1.0, 0.0, 0.0, 0.4, 0.2, 1.0]), sample) == PENALTY
    assert objective(GabillonParams.reference().to_vector(), sample) < PENALTY


def test_calibration_recovers_the_short_volatility(synthetic_history, tmp_path):
    window = synthetic_history.window(date(2006, 1, 1), date(2007, 12, 31))
    init = initial_guess(window, horizon_years=1.5)
    sample = build_futures_sample(window)
    calibration = calibrate_mle(window, init, sample=sample)
    truth = GabillonParams.reference()
    assert abs(calibration.params.sigma_s - truth.sigma_s) < 0.25 * truth.sigma_s
    assert calibration.objective <= objective(init.to_vector(), sample)
    assert calibration.covariance.shape == (6, 6)
    frame = calibration.confidence_intervals()
    assert list(frame['name']) == ['lambda', 'mu1', 'mu2', 'sigma_S', 'sigma_L', 'rho']
    assert np.all(frame['low'] <= frame['high'])
    path = tmp_path / 'intervals.csv'
    calibration.write_intervals(str(path))
    assert path.read_text().startswith('name,value,low,high')


@pytest.mark.parametrize('seed', [31, 32, 33])
def test_calibration_recovers_every_parameter(seed):
    truth = GabillonParams.reference()
    start = date(2002, 1, 1)
    history = synthesize_history(truth, SpotParams.reference(1), start, start + timedelta(days=1999), seed=seed, spikes=False)
    found = calibrate_mle(history, initial_guess(history, horizon_years=1.5)).params
    assert found.lam == pytest.approx(truth.lam, rel=0.2)
    assert found.sigma_s == pytest.approx(truth.sigma_s, rel=0.15)
    assert found.sigma_l == pytest.approx(truth.sigma_l, rel=0.2)
    assert abs(found.rho - truth.rho) < 0.15
    assert abs(found.mu1 - truth.mu1) < 0.1
    assert abs(found.mu2 - truth.mu2) < 0.1


def test_flat_returns_are_not_identifiable(synthetic_history):
    flat = FuturesSample(np.zeros((120, 4)), np.full((120, 4), 0.5), np.full(120, 2007.0), np.full(120, 1 / 365))
    with pytest.raises(ConvergenceError):
        calibrate_mle(synthetic_history, GabillonParams.reference(), sample=flat)
