import logging
from typing import Callable

import numpy as np

HESSIAN_RELATIVE_STEP = 1e-4
HESSIAN_MIN_STEP = 1e-8


def hessian_steps(x: np.ndarray, relative: float = HESSIAN_RELATIVE_STEP, minimum: float = HESSIAN_MIN_STEP) -> np.ndarray:
    return np.maximum(relative * np.abs(x), minimum)


def numerical_hessian(f: Callable[[np.ndarray], float], x: np.ndarray, steps: np.ndarray = None) -> np.ndarray:
    """central finite-difference Hessian of `f` at `x`"""
    x = np.asarray(x, dtype=float)
    h = hessian_steps(x) if steps is None else np.asarray(steps, dtype=float)
    k = len(x)
    hess = np.empty((k, k))
    f0 = f(x)
    for a in range(k):
        ea = np.zeros(k)
        ea[a] = h[a]
        hess[a, a] = (f(x + ea) - 2 * f0 + f(x - ea)) / h[a]**2
        for b in range(a):
            eb = np.zeros(k)
            eb[b] = h[b]
            value = (f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)) / (4 * h[a] * h[b])
            hess[a, b] = hess[b, a] = value
    return hess


def clip_psd(matrix: np.ndarray) -> np.ndarray:
    """symmetric part of `matrix` with negative eigenvalues set to zero"""
    sym = 0.5 * (matrix + matrix.T)
    values, vectors = np.linalg.eigh(sym)
    return (vectors * np.maximum(values, 0.0)) @ vectors.T


def covariance_from_hessian(hessian: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """`scale * inverse(hessian)`, made positive semidefinite; singular Hessians use the pseudo-inverse"""
    try:
        inverse = np.linalg.inv(hessian)
    except np.linalg.LinAlgError:
        logging.warning('Hessian is singular, using its pseudo-inverse for the covariance')
        inverse = np.linalg.pinv(hessian)
    if not np.all(np.isfinite(inverse)):
        inverse = np.linalg.pinv(np.nan_to_num(hessian))
    values = np.linalg.eigvalsh(0.5 * (inverse + inverse.T))
    if values.min() < 0:
        logging.warning(f'Hessian is not positive definite (smallest covariance eigenvalue {values.min():.3g}), clipping')
    return clip_psd(scale * inverse)
