import logging

import numpy as np

from constants import BASIS_QUADRATIC, BASIS_SPECS, RIDGE_PENALTY
from errors import DomainError


def quadratic_features(spot: np.ndarray, prompt: np.ndarray) -> np.ndarray:
    """intercept, (log S, log P, y) and all their degree-2 products; y = (S - P) / P"""
    log_s = np.log(spot)
    log_p = np.log(prompt)
    y = (spot - prompt) / prompt
    return np.column_stack([
        np.ones_like(log_s),
        log_s,
        log_p,
        y,
        log_s**2,
        log_p**2,
        y**2,
        log_s * log_p,
        log_s * y,
        log_p * y,
    ])


def basis_features(basis_spec: str, spot: np.ndarray, prompt: np.ndarray) -> np.ndarray:
    if basis_spec == BASIS_QUADRATIC:
        return quadratic_features(spot, prompt)
    raise DomainError(f'unknown regression basis "{basis_spec}", expected one of {BASIS_SPECS}')


def basis_size(basis_spec: str) -> int:
    return basis_features(basis_spec, np.ones(1), np.ones(1)).shape[1]


def regress_condexp(features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Least-squares coefficients of `targets` (one column per right-hand side) on `features`, whose first column is the intercept.
    Rank-deficient designs fall back to a ridge fit of the centered non-constant features.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n, k = features.shape
    if n <= k:
        raise DomainError(f'regression needs more observations than the {k} basis functions, got {n}')
    if not np.all(np.isfinite(targets)):
        raise DomainError('regression targets must be finite')
    coefficients, _, rank, _ = np.linalg.lstsq(features, targets, rcond=None)
    if rank == k:
        return coefficients
    logging.debug(f'Regression design has rank {rank} < {k}, using ridge fallback')
    return _ridge(features, targets)


def _ridge(features: np.ndarray, targets: np.ndarray, penalty: float = RIDGE_PENALTY) -> np.ndarray:
    x = features[:, 1:]
    x_mean = x.mean(axis=0)
    y_mean = targets.mean(axis=0)
    centered = x - x_mean
    gram = centered.T @ centered + penalty * np.eye(x.shape[1])
    slopes = np.linalg.solve(gram, centered.T @ (targets - y_mean))
    intercept = y_mean - x_mean @ slopes
    return np.concatenate([np.reshape(intercept, (1, ) + slopes.shape[1:]), slopes])


def predict(features: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    return features @ coefficients
