import logging
from typing import Optional

import numpy as np
from scipy import optimize

from errors import ConvergenceError, DomainError

from .params import GarchParams

# upper bound of gamma + alpha during estimation
MAX_PERSISTENCE = 0.9999
LOG_2PI = np.log(2 * np.pi)


def garch_filter(residuals: np.ndarray, g: GarchParams, initial_var: float) -> tuple[np.ndarray, np.ndarray]:
    """
    sigma_0^2 = initial_var, sigma_t^2 = kappa + gamma sigma_{t-1}^2 + alpha eps_{t-1}^2.
    Returns the variances and the standardized residuals z_t = eps_t / sigma_t.
    """
    g.check_order()
    if not g.is_stationary():
        raise DomainError(f'GARCH coefficients are not covariance stationary: {g}')
    if not initial_var > 0:
        raise DomainError(f'initial GARCH variance must be positive, got {initial_var}')
    eps = np.asarray(residuals, dtype=float)
    variance = np.empty(len(eps))
    if len(eps):
        variance[0] = initial_var
    for t in range(1, len(eps)):
        variance[t] = g.kappa + g.gamma1 * variance[t - 1] + g.alpha1 * eps[t - 1]**2
    return variance, eps / np.sqrt(variance)


def garch_unfilter(z: np.ndarray, variance: np.ndarray) -> np.ndarray:
    return np.asarray(z) * np.sqrt(variance)


def gaussian_loglik(residuals: np.ndarray, g: GarchParams, initial_var: float) -> tuple[float, np.ndarray]:
    """Gaussian log-likelihood of `residuals` under the GARCH recursion, and the standardized residuals"""
    variance, z = garch_filter(residuals, g, initial_var)
    return float(-0.5 * np.sum(LOG_2PI + np.log(variance) + z**2)), z


def fit_garch(residuals: np.ndarray, start: Optional[GarchParams] = None) -> tuple[GarchParams, float]:
    """
    Quasi-maximum likelihood GARCH(1,1) fit. The recursion starts at the mean squared residual.
    kappa is optimized relative to that scale so that all three unknowns are of order one.
    """
    eps = np.asarray(residuals, dtype=float)
    scale = float(np.mean(eps**2))
    if not scale > 0:
        raise DomainError('GARCH estimation needs residuals that are not all zero')

    def negative_loglik(x: np.ndarray) -> float:
        g = GarchParams(x[0] * scale, [x[1]], [x[2]])
        if not g.is_stationary():
            return 1e10
        value, _ = gaussian_loglik(eps, g, scale)
        return -value / len(eps)

    if start is not None and start.is_stationary():
        x0 = np.array([start.kappa / scale, start.gamma1, start.alpha1])
    else:
        x0 = np.array([0.05, 0.85, 0.10])
    result = optimize.minimize(
        negative_loglik,
        x0=x0,
        method='SLSQP',
        bounds=[(1e-8, 10.0), (0.0, MAX_PERSISTENCE), (0.0, MAX_PERSISTENCE)],
        constraints=[{'type': 'ineq', 'fun': lambda x: MAX_PERSISTENCE - x[1] - x[2]}],
        options={'maxiter': 500, 'ftol': 1e-12},
    )
    fitted = GarchParams(result.x[0] * scale, [result.x[1]], [result.x[2]])
    if not result.success:
        raise ConvergenceError(f'GARCH likelihood did not converge: {result.message}', best=fitted)
    loglik, _ = gaussian_loglik(eps, fitted, scale)
    logging.debug(f'Fitted {fitted}, log-likelihood {loglik:.4f}')
    return fitted, loglik
