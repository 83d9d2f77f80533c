import logging
from typing import Optional

import numpy as np
import pandas as pd
from scipy import optimize, stats

from constants import RHO_BOUND, SEASONAL_T1, SEASONAL_T2
from errors import ConvergenceError, InsufficientCurveError, InsufficientDataError, SingularMatrixError
from market.history import PriceHistory, constant_maturity_returns, contract_expiry
from numerics import covariance_from_hessian, numerical_hessian
from utils import year_delta, year_fraction

from .params import PARAM_NAMES, GabillonParams, clip_rho, seasonal_vol

MIN_ROUGH_OBSERVATIONS = 60
MIN_MLE_OBSERVATIONS = 100
MIN_MLE_MATURITIES = 3
MAX_CONDITION = 1e12
PENALTY = 1e10
# residual variance floor, keeps the profiled term finite on noiseless data
MIN_RESIDUAL_VARIANCE = 1e-300

BOUNDS = [
    (1e-3, 50.0),  # lambda
    (-0.95, 0.95),  # mu1
    (-0.95, 0.95),  # mu2
    (1e-4, 5.0),  # sigma_S
    (1e-4, 5.0),  # sigma_L
    (-RHO_BOUND, RHO_BOUND),  # rho
]


def invert_factors(z: np.ndarray, h: np.ndarray, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """least-squares factor innovations x with z ~ H x"""
    z = np.asarray(z, dtype=float)
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[1] != 2 or h.shape[0] != len(z) or len(z) < 2:
        raise ValueError(f'loading matrix of shape {h.shape} does not fit {len(z)} returns')
    condition = np.linalg.cond(h)
    if not np.isfinite(condition) or condition > max_condition:
        raise SingularMatrixError(f'loading matrix is rank deficient (condition number {condition:.3g})')
    x, _, _, _ = np.linalg.lstsq(h, z, rcond=None)
    return x


class FuturesSample:
    """Simple returns of the first `n` live contracts between consecutive dates, with their loading inputs"""
    returns: np.ndarray
    tau: np.ndarray
    season: np.ndarray
    dt: np.ndarray

    def __init__(self, returns: np.ndarray, tau: np.ndarray, season: np.ndarray, dt: np.ndarray):
        self.returns = returns
        self.tau = tau
        self.season = season
        self.dt = dt

    @property
    def n_obs(self) -> int:
        return self.returns.shape[0]

    @property
    def n_maturities(self) -> int:
        return self.returns.shape[1]


def build_futures_sample(history: PriceHistory, n_maturities: int = 12, expiry_offset_days: int = 0) -> FuturesSample:
    expiries = [contract_expiry(m, expiry_offset_days) for m in history.maturities]
    per_date: list[list[int]] = []
    for i in range(len(history) - 1):
        later = history.dates[i + 1]
        quoted = ~np.isnan(history.curves[i]) & ~np.isnan(history.curves[i + 1])
        per_date.append([k for k in np.flatnonzero(quoted) if expiries[k] > later])
    if len(per_date) < MIN_MLE_OBSERVATIONS:
        raise InsufficientDataError(f'futures calibration needs {MIN_MLE_OBSERVATIONS} returns, got {len(per_date)}')
    n = min(n_maturities, min(len(ks) for ks in per_date))
    if n < MIN_MLE_MATURITIES:
        raise InsufficientCurveError(f'futures calibration needs {MIN_MLE_MATURITIES} maturities quoted on consecutive dates, got {n}')
    m = len(per_date)
    returns = np.empty((m, n))
    tau = np.empty((m, n))
    season = np.empty(m)
    dt = np.empty(m)
    for i, ks in enumerate(per_date):
        ks = ks[:n]
        d = history.dates[i]
        returns[i] = history.curves[i + 1, ks] / history.curves[i, ks] - 1
        tau[i] = [year_delta(d, history.maturities[k]) for k in ks]
        season[i] = year_fraction(d)
        dt[i] = year_delta(d, history.dates[i + 1])
    return FuturesSample(returns, tau, season, dt)


def loadings(p: GabillonParams, sample: FuturesSample) -> np.ndarray:
    """H_t for every observation, shape (m, n, 2)"""
    decay = np.exp(-p.lam * np.maximum(sample.tau, 0.0))
    root_dt = np.sqrt(sample.dt)[:, None]
    phi = seasonal_vol(sample.season, p)[:, None]
    return np.stack([root_dt * decay * phi * p.sigma_s, root_dt * (1 - decay) * p.sigma_l], axis=-1)


def objective(vector: np.ndarray, sample: FuturesSample, t1: float = SEASONAL_T1, t2: float = SEASONAL_T2) -> float:
    """
    log det Sigma + mean x' Sigma^-1 x, completed with the volume term of the projection
    and the profiled variance of the part of the returns outside the factor span.
    """
    p = GabillonParams.from_vector(vector, t1=t1, t2=t2, validate=False)
    if not (p.lam > 0 and p.sigma_s > 0 and p.sigma_l > 0 and abs(p.rho) < 1 and p.phi_positive()):
        return PENALTY
    h = loadings(p, sample)
    hth = np.einsum('mni,mnj->mij', h, h)
    htz = np.einsum('mni,mn->mi', h, sample.returns)
    det_hth = hth[:, 0, 0] * hth[:, 1, 1] - hth[:, 0, 1] * hth[:, 1, 0]
    if not np.all(det_hth > 0):
        return PENALTY
    x = np.linalg.solve(hth, htz[..., None])[..., 0]
    quad = (x[:, 0]**2 - 2 * p.rho * x[:, 0] * x[:, 1] + x[:, 1]**2) / (1 - p.rho**2)
    residual = sample.returns - np.einsum('mni,mi->mn', h, x)
    dof = sample.n_maturities - 2
    value = np.log(1 - p.rho**2) + quad.mean() + np.log(det_hth).mean()
    if dof > 0:
        variance = max(float(np.mean(np.sum(residual**2, axis=1))) / dof, MIN_RESIDUAL_VARIANCE)
        value += dof * np.log(variance)
    return float(value) if np.isfinite(value) else PENALTY


class FuturesCalibration:
    params: GabillonParams
    covariance: np.ndarray
    objective: float
    n_obs: int
    n_maturities: int

    def __init__(self, params: GabillonParams, covariance: np.ndarray, objective: float, n_obs: int, n_maturities: int):
        self.params = params
        self.covariance = covariance
        self.objective = objective
        self.n_obs = n_obs
        self.n_maturities = n_maturities

    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.covariance), 0.0))

    def confidence_intervals(self, level: float = 0.95) -> pd.DataFrame:
        """Wald intervals from the covariance estimate"""
        z = stats.norm.ppf(0.5 + level / 2)
        values = self.params.to_vector()
        half = z * self.std_errors()
        return pd.DataFrame({'name': PARAM_NAMES, 'value': values, 'low': values - half, 'high': values + half})

    def write_intervals(self, path: str, level: float = 0.95):
        self.confidence_intervals(level).to_csv(path, index=False, float_format='%.10g')


def rough_estimates(history: PriceHistory, horizon_years: float = 4.0, expiry_offset_days: int = 0) -> tuple[float, float, float]:
    """
    Annualized volatilities of the rolling prompt and of a constant-maturity long contract, and their correlation.
    The correlation is NaN when either volatility vanishes.
    """
    if len(history) < MIN_ROUGH_OBSERVATIONS:
        raise InsufficientDataError(f'rough estimates need {MIN_ROUGH_OBSERVATIONS} observations, got {len(history)}')
    prompt_returns, long_returns = constant_maturity_returns(history, horizon_years, expiry_offset_days)
    root_dt = np.sqrt([year_delta(a, b) for a, b in zip(history.dates, history.dates[1:])])
    prompt_scaled = prompt_returns / root_dt
    long_scaled = long_returns / root_dt
    prompt_dev = prompt_scaled - prompt_scaled.mean()
    long_dev = long_scaled - long_scaled.mean()
    m = len(prompt_scaled)
    sigma_s = float(np.sqrt(np.sum(prompt_dev**2) / (m - 1)))
    sigma_l = float(np.sqrt(np.sum(long_dev**2) / (m - 1)))
    if sigma_s > 0 and sigma_l > 0:
        rho = float(np.sum(prompt_dev * long_dev) / (m - 1) / (sigma_s * sigma_l))
    else:
        rho = float('nan')
    logging.info(f'Rough futures estimates: sigma_S={sigma_s:.4f} sigma_L={sigma_l:.4f} rho={rho:.4f}')
    return sigma_s, sigma_l, rho


def initial_guess(history: PriceHistory, horizon_years: float = 4.0, expiry_offset_days: int = 0, lam: float = 1.0) -> GabillonParams:
    sigma_s, sigma_l, rho = rough_estimates(history, horizon_years, expiry_offset_days)
    return GabillonParams(
        lam=lam,
        mu1=0.0,
        mu2=0.0,
        sigma_s=max(sigma_s, BOUNDS[3][0]),
        sigma_l=max(sigma_l, BOUNDS[4][0]),
        rho=0.0 if np.isnan(rho) else clip_rho(rho),
    )


def calibrate_mle(
    history: PriceHistory,
    init: GabillonParams,
    n_maturities: int = 12,
    expiry_offset_days: int = 0,
    max_iterations: int = 20000,
    sample: Optional[FuturesSample] = None,
) -> FuturesCalibration:
    """Maximum likelihood fit of the six model parameters; the seasonal anchors stay at those of `init`"""
    sample = sample or build_futures_sample(history, n_maturities, expiry_offset_days)
    if not np.any(sample.returns):
        raise ConvergenceError('futures returns are all zero, the curve model is not identifiable', best=init)

    def target(vector: np.ndarray) -> float:
        return objective(vector, sample, init.t1, init.t2)

    x0 = np.clip(init.to_vector(), [b[0] for b in BOUNDS], [b[1] for b in BOUNDS])
    logging.info(f'Calibrating futures model on {sample.n_obs} returns x {sample.n_maturities} maturities')
    result = optimize.minimize(
        target,
        x0=x0,
        method='Nelder-Mead',
        bounds=BOUNDS,
        options={
            'maxiter': max_iterations,
            'maxfev': max_iterations,
            'xatol': 1e-7,
            'fatol': 1e-10,
            'adaptive': True,
        },
    )
    best = GabillonParams.from_vector(result.x, t1=init.t1, t2=init.t2, validate=False)
    if not result.success:
        raise ConvergenceError(f'futures likelihood did not converge: {result.message}', best=best, details={'iterations': int(result.nit)})
    hessian = numerical_hessian(target, result.x)
    covariance = covariance_from_hessian(hessian, scale=2.0 / sample.n_obs)
    calibration = FuturesCalibration(best, covariance, float(result.fun), sample.n_obs, sample.n_maturities)
    logging.info(f'Calibrated {best} (objective {result.fun:.6f}, {result.nit} iterations)')
    return calibration
