import logging
from typing import Optional

import numpy as np
from scipy import stats

from constants import SPIKE_THRESHOLD_K, STREAM_FAMILY
from errors import DomainError, FamilyConstructionError
from market.history import PriceHistory
from numerics import clip_psd
from spot.estimate import RegressionSample, build_regression_sample, spot_loglik
from spot.params import THETA_NAMES, SpotParams
from utils import stream_rng

REJECT_STATIONARITY = 'stationarity'
REJECT_NORMALITY = 'normality'
REJECT_LIKELIHOOD = 'likelihood'
REJECT_REASONS = [REJECT_STATIONARITY, REJECT_NORMALITY, REJECT_LIKELIHOOD]

DEFAULT_EPSILON = 0.05
DEFAULT_KS_LEVEL = 0.05
DEFAULT_ATTEMPT_FACTOR = 50


class FamilyDraw:
    """one perturbed parameter draw and the verdict of the acceptance tests"""
    draw_id: int
    params: SpotParams
    loglik: float
    ks_pvalue: float
    reject_reason: str

    def __init__(self, draw_id: int, params: SpotParams, loglik: float = float('nan'), ks_pvalue: float = float('nan'), reject_reason: str = ''):
        self.draw_id = draw_id
        self.params = params
        self.loglik = loglik
        self.ks_pvalue = ks_pvalue
        self.reject_reason = reject_reason

    def __repr__(self):
        return f'FamilyDraw({self.draw_id}, {"accepted" if self.accepted else self.reject_reason})'

    @property
    def accepted(self) -> bool:
        return not self.reject_reason


class ModelFamily:
    base: SpotParams
    base_loglik: float
    draws: list[FamilyDraw]
    epsilon: float
    ks_level: float

    def __init__(self, base: SpotParams, base_loglik: float, draws: list[FamilyDraw], epsilon: float, ks_level: float):
        self.base = base
        self.base_loglik = base_loglik
        self.draws = draws
        self.epsilon = epsilon
        self.ks_level = ks_level

    def __repr__(self):
        return f'ModelFamily({len(self.members)} members of {len(self.draws)} draws, rejected {self.rejected})'

    @property
    def accepted(self) -> list[FamilyDraw]:
        return [d for d in self.draws if d.accepted]

    @property
    def members(self) -> list[SpotParams]:
        return [d.params for d in self.accepted]

    @property
    def rejected(self) -> dict[str, int]:
        return {reason: sum(1 for d in self.draws if d.reject_reason == reason) for reason in REJECT_REASONS}

    @property
    def loglik_threshold(self) -> float:
        return likelihood_threshold(self.base_loglik, self.epsilon)

    def subset(self, n_members: int) -> 'ModelFamily':
        """the family of the first `n_members` accepted draws"""
        keep, accepted = [], 0
        for d in self.draws:
            if d.accepted:
                if accepted == n_members:
                    break
                accepted += 1
            keep.append(d)
        return ModelFamily(self.base, self.base_loglik, keep, self.epsilon, self.ks_level)


def likelihood_threshold(base_loglik: float, epsilon: float) -> float:
    """lowest log-likelihood within the relative slack `epsilon` of the optimum"""
    return base_loglik - epsilon * abs(base_loglik)


def check_draw(draw_id: int, params: SpotParams, sample: RegressionSample, threshold: float, ks_level: float) -> FamilyDraw:
    if not params.garch.is_stationary():
        return FamilyDraw(draw_id, params, reject_reason=REJECT_STATIONARITY)
    loglik, z = spot_loglik(params, sample)
    pvalue = float(stats.kstest(z, 'norm').pvalue)
    if pvalue < ks_level:
        return FamilyDraw(draw_id, params, loglik, pvalue, REJECT_NORMALITY)
    if not loglik >= threshold:
        return FamilyDraw(draw_id, params, loglik, pvalue, REJECT_LIKELIHOOD)
    return FamilyDraw(draw_id, params, loglik, pvalue)


def generate_family(
    theta_star: SpotParams,
    sigma_star: np.ndarray,
    history: PriceHistory,
    n_target: int,
    epsilon: float = DEFAULT_EPSILON,
    ks_level: float = DEFAULT_KS_LEVEL,
    seed: int = 0,
    attempt_factor: int = DEFAULT_ATTEMPT_FACTOR,
    k: float = SPIKE_THRESHOLD_K,
    expiry_offset_days: int = 0,
    sample: Optional[RegressionSample] = None,
) -> ModelFamily:
    """
    Gaussian perturbations of the regression and GARCH parameters of `theta_star` with covariance `sigma_star`,
    kept when the GARCH is stationary, the standardized residuals on `history` pass a Kolmogorov-Smirnov
    normality test at `ks_level`, and the log-likelihood is within the relative slack `epsilon` of the optimum.
    Draws stop at `n_target` members or after `attempt_factor * n_target` attempts.
    """
    if n_target < 1:
        raise DomainError(f'model family needs a positive target size, got {n_target}')
    sigma = np.asarray(sigma_star, dtype=float)
    if sigma.shape != (len(THETA_NAMES), len(THETA_NAMES)):
        raise DomainError(f'parameter covariance must be {len(THETA_NAMES)}x{len(THETA_NAMES)}, got {sigma.shape}')
    if not np.allclose(sigma, sigma.T) or np.linalg.eigvalsh(sigma).min() < -1e-10 * max(1.0, np.abs(sigma).max()):
        raise DomainError('parameter covariance is not symmetric positive semidefinite')
    if not 0 <= epsilon < 1:
        raise DomainError(f'likelihood slack must be in [0, 1), got {epsilon}')
    sample = sample or build_regression_sample(history, theta_star.model_id, k, expiry_offset_days)
    base_loglik, _ = spot_loglik(theta_star, sample)
    threshold = likelihood_threshold(base_loglik, epsilon)

    rng = stream_rng(seed, STREAM_FAMILY, 0)
    theta = theta_star.to_theta()
    sigma = clip_psd(sigma)
    draws: list[FamilyDraw] = []
    accepted = 0
    max_attempts = attempt_factor * n_target
    while accepted < n_target and len(draws) < max_attempts:
        perturbed = rng.multivariate_normal(theta, sigma, method='eigh')
        draw = check_draw(len(draws) + 1, theta_star.with_theta(perturbed, validate=False), sample, threshold, ks_level)
        draws.append(draw)
        accepted += draw.accepted
    family = ModelFamily(theta_star, base_loglik, draws, epsilon, ks_level)
    if not accepted:
        raise FamilyConstructionError(f'no perturbed model accepted in {len(draws)} draws', family.rejected)
    if accepted < n_target:
        logging.warning(f'Model family has only {accepted} of {n_target} members after {len(draws)} draws, rejected: {family.rejected}')
    assert all(d.loglik >= threshold for d in family.accepted)
    logging.info(f'Generated {family}, log-likelihood threshold {threshold:.4f}')
    return family
