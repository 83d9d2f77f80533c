import logging
from datetime import date
from typing import Optional

import numpy as np
from scipy import optimize

from constants import DAYS_PER_YEAR, MIN_SPIKE_EVENTS, REFERENCE_SPOT_MODEL1, SPIKE_THRESHOLD_K, SPIKE_WINDOW_NEG, SPIKE_WINDOW_POS
from errors import DomainError, InsufficientDataError, SingularMatrixError
from market.history import PriceHistory, RollingSeries, rolling_series
from market.spikes import Sign, SpikeReport, detect_spikes
from numerics import covariance_from_hessian, numerical_hessian

from .garch import MAX_PERSISTENCE, fit_garch, gaussian_loglik
from .jumps import window_mask
from .params import MODEL_IDS, THETA_NAMES, GarchParams, SpikeParams, SpotParams

MIN_SPOT_OBSERVATIONS = 250


def default_spike_params() -> tuple[SpikeParams, SpikeParams]:
    """fallback jump laws, windows and reversion speeds"""
    ref = REFERENCE_SPOT_MODEL1
    return (
        SpikeParams(ref['spike_pos.beta'], 0.0, ref['spike_pos.jump_mean'], ref['spike_pos.jump_std'], SPIKE_WINDOW_POS),
        SpikeParams(ref['spike_neg.beta'], 0.0, ref['spike_neg.jump_mean'], ref['spike_neg.jump_std'], SPIKE_WINDOW_NEG),
    )


class RegressionSample:
    """Regression rows of a spot model on a history, spike dates removed"""
    model_id: int
    design: np.ndarray
    target: np.ndarray
    dates: list[date]
    series: RollingSeries
    spikes: SpikeReport

    def __init__(self, model_id: int, design: np.ndarray, target: np.ndarray, dates: list[date], series: RollingSeries, spikes: SpikeReport):
        self.model_id = model_id
        self.design = design
        self.target = target
        self.dates = dates
        self.series = series
        self.spikes = spikes

    def __len__(self):
        return len(self.target)

    def residuals(self, a) -> np.ndarray:
        return self.target - self.design @ np.asarray(a, dtype=float)


def build_regression_sample(history: PriceHistory, model_id: int, k: float = SPIKE_THRESHOLD_K, expiry_offset_days: int = 0) -> RegressionSample:
    if model_id not in MODEL_IDS:
        raise DomainError(f'unknown spot model {model_id}')
    if len(history) < MIN_SPOT_OBSERVATIONS:
        raise InsufficientDataError(f'spot estimation needs {MIN_SPOT_OBSERVATIONS} observations, got {len(history)}')
    series = rolling_series(history, expiry_offset_days)
    spikes = detect_spikes(series.dates, series.spread, k)
    s, p = series.spot, series.prompt
    if model_id == 1:
        target = np.log(s[1:] / s[:-1])
        design = np.column_stack([np.ones(len(s) - 1), np.log(p[:-1] / s[:-1]), np.log(p[1:] / p[:-1])])
    else:
        target = series.spread[1:]
        design = np.column_stack([np.ones(len(s) - 1), series.spread[:-1], series.front_back[:-1]])
    keep = ~(spikes.flags[1:] | spikes.flags[:-1])
    dates = [d for d, kept in zip(series.dates[1:], keep) if kept]
    logging.debug(f'Spot model {model_id} regression: {int(keep.sum())} rows, {int((~keep).sum())} removed around spikes')
    return RegressionSample(model_id, design[keep], target[keep], dates, series, spikes)


def spot_loglik(params: SpotParams, sample: RegressionSample) -> tuple[float, np.ndarray]:
    """Gaussian GARCH log-likelihood of the regression residuals and their standardized values"""
    eps = sample.residuals([params.a1, params.a2, params.a3])
    return gaussian_loglik(eps, params.garch, float(np.mean(eps**2)))


def _theta_loglik(theta: np.ndarray, sample: RegressionSample) -> float:
    g = GarchParams(theta[3], [theta[4]], [theta[5]])
    if not g.is_stationary():
        return -np.inf
    eps = sample.residuals(theta[:3])
    value, _ = gaussian_loglik(eps, g, float(np.mean(eps**2)))
    return value


def fit_spike_params(sample: RegressionSample, history: PriceHistory, defaults: SpikeParams, sign: Sign) -> SpikeParams:
    """intensity per window-year, log jump law from the spread of the detected spikes"""
    window = set(defaults.window)
    events = [e for e in sample.spikes.of_sign(sign) if e.date.month in window]
    window_years = float(np.count_nonzero(window_mask(history.dates, defaults.window))) / DAYS_PER_YEAR
    intensity = len(events) / window_years if window_years > 0 else 0.0
    fitted = SpikeParams(defaults.beta, intensity, defaults.jump_mean, defaults.jump_std, defaults.window)
    if len(events) < MIN_SPIKE_EVENTS:
        logging.warning(f'Only {len(events)} {sign} spikes in window {sorted(window)}, keeping the default jump law N({defaults.jump_mean}, {defaults.jump_std})')
        return fitted
    sizes = np.log1p([e.spread for e in events])
    fitted.jump_mean = float(np.mean(sizes))
    fitted.jump_std = float(np.std(sizes, ddof=1))
    return fitted


class SpotEstimate:
    params: SpotParams
    loglik: float
    covariance: np.ndarray
    sample: RegressionSample

    def __init__(self, params: SpotParams, loglik: float, covariance: np.ndarray, sample: RegressionSample):
        self.params = params
        self.loglik = loglik
        self.covariance = covariance
        self.sample = sample

    def std_errors(self) -> dict[str, float]:
        return dict(zip(THETA_NAMES, np.sqrt(np.maximum(np.diag(self.covariance), 0.0))))


def _ols(sample: RegressionSample) -> tuple[np.ndarray, np.ndarray]:
    a, _, rank, _ = np.linalg.lstsq(sample.design, sample.target, rcond=None)
    if rank < sample.design.shape[1]:
        raise SingularMatrixError(f'spot model {sample.model_id} regressors are collinear (rank {rank})')
    eps = sample.residuals(a)
    s2 = float(eps @ eps) / (len(eps) - len(a))
    return a, s2 * np.linalg.inv(sample.design.T @ sample.design)


def _refine(theta: np.ndarray, sample: RegressionSample) -> np.ndarray:
    """joint likelihood polish of the two-step estimate"""
    scale = float(np.mean(sample.residuals(theta[:3])**2))
    x0 = theta.copy()
    x0[3] /= scale

    def negative(x: np.ndarray) -> float:
        natural = x.copy()
        natural[3] *= scale
        value = _theta_loglik(natural, sample)
        return -value / len(sample) if np.isfinite(value) else 1e10

    result = optimize.minimize(
        negative,
        x0=x0,
        method='SLSQP',
        bounds=[(None, None)] * 3 + [(1e-8, 10.0), (0.0, MAX_PERSISTENCE), (0.0, MAX_PERSISTENCE)],
        constraints=[{'type': 'ineq', 'fun': lambda x: MAX_PERSISTENCE - x[4] - x[5]}],
        options={'maxiter': 500, 'ftol': 1e-12},
    )
    refined = result.x.copy()
    refined[3] *= scale
    if not result.success or _theta_loglik(refined, sample) < _theta_loglik(theta, sample):
        logging.warning(f'Joint spot likelihood refinement failed ({result.message}), keeping the two-step estimate')
        return theta
    return refined


def _covariance(theta: np.ndarray, sample: RegressionSample, ols_cov: np.ndarray) -> np.ndarray:
    hessian = numerical_hessian(lambda x: -_theta_loglik(x, sample), theta)
    if np.all(np.isfinite(hessian)) and np.linalg.eigvalsh(0.5 * (hessian + hessian.T)).min() > 0:
        return covariance_from_hessian(hessian)
    logging.warning('Joint spot likelihood Hessian is not positive definite, using block-diagonal covariance')
    garch_hessian = numerical_hessian(lambda x: -_theta_loglik(np.concatenate([theta[:3], x]), sample), theta[3:])
    covariance = np.zeros((6, 6))
    covariance[:3, :3] = ols_cov
    covariance[3:, 3:] = covariance_from_hessian(np.nan_to_num(garch_hessian, nan=0.0, posinf=0.0, neginf=0.0))
    return covariance


def estimate_spot(
    history: PriceHistory,
    model_id: int,
    k: float = SPIKE_THRESHOLD_K,
    expiry_offset_days: int = 0,
    spike_defaults: Optional[tuple[SpikeParams, SpikeParams]] = None,
) -> SpotEstimate:
    """
    Spike detection and removal, OLS of the model regression, GARCH(1,1) quasi-likelihood on the residuals,
    then the spike intensities and jump laws. Spike reversion speeds are taken from `spike_defaults`.
    """
    pos_defaults, neg_defaults = spike_defaults or default_spike_params()
    sample = build_regression_sample(history, model_id, k, expiry_offset_days)
    a, ols_cov = _ols(sample)
    garch, _ = fit_garch(sample.residuals(a))
    theta = _refine(np.concatenate([a, [garch.kappa, garch.gamma1, garch.alpha1]]), sample)
    covariance = _covariance(theta, sample, ols_cov)
    params = SpotParams(
        model_id,
        theta[0],
        theta[1],
        theta[2],
        GarchParams(theta[3], [theta[4]], [theta[5]]),
        fit_spike_params(sample, history, pos_defaults, 'positive'),
        fit_spike_params(sample, history, neg_defaults, 'negative'),
    )
    loglik, _ = spot_loglik(params, sample)
    logging.info(f'Estimated {params} on {len(sample)} rows, log-likelihood {loglik:.4f}')
    return SpotEstimate(params, loglik, covariance, sample)
