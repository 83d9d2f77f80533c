from typing import Any, Mapping, Union

import numpy as np

from constants import REFERENCE_GABILLON, RHO_BOUND, SEASONAL_T1, SEASONAL_T2
from errors import DomainError
from paramfile import read_flat, write_flat

# order of the estimated parameter vector
PARAM_NAMES = ['lambda', 'mu1', 'mu2', 'sigma_S', 'sigma_L', 'rho']

_PHI_CHECK_GRID = np.linspace(0.0, 1.0, 2001)

ArrayOrFloat = Union[float, np.ndarray]


class GabillonParams:
    """Seasonal two-factor futures curve model: short factor with seasonal weight and decay `lam`, long factor."""
    lam: float
    mu1: float
    mu2: float
    t1: float
    t2: float
    sigma_s: float
    sigma_l: float
    rho: float

    def __init__(
        self,
        lam: float,
        mu1: float,
        mu2: float,
        sigma_s: float,
        sigma_l: float,
        rho: float,
        t1: float = SEASONAL_T1,
        t2: float = SEASONAL_T2,
        validate: bool = True,
    ):
        self.lam = float(lam)
        self.mu1 = float(mu1)
        self.mu2 = float(mu2)
        self.sigma_s = float(sigma_s)
        self.sigma_l = float(sigma_l)
        self.rho = float(rho)
        self.t1 = float(t1)
        self.t2 = float(t2)
        if validate:
            self.validate()

    def __repr__(self):
        values = ', '.join(f'{name}={value:.6g}' for name, value in zip(PARAM_NAMES, self.to_vector()))
        return f'GabillonParams({values})'

    def __eq__(self, other):
        return isinstance(other, GabillonParams) and self.to_dict() == other.to_dict()

    def phi_positive(self) -> bool:
        return bool(np.all(seasonal_vol(_PHI_CHECK_GRID, self) > 0))

    def validate(self):
        if not self.lam > 0:
            raise DomainError(f'lambda must be positive, got {self.lam}')
        if self.sigma_s < 0 or self.sigma_l < 0:
            raise DomainError(f'volatilities must not be negative, got sigma_S={self.sigma_s}, sigma_L={self.sigma_l}')
        if abs(self.rho) > 1:
            raise DomainError(f'|rho| must not exceed 1, got {self.rho}')
        if not self.phi_positive():
            raise DomainError(f'seasonal weight is not positive everywhere for mu1={self.mu1}, mu2={self.mu2}')

    def to_vector(self) -> np.ndarray:
        return np.array([self.lam, self.mu1, self.mu2, self.sigma_s, self.sigma_l, self.rho])

    @staticmethod
    def from_vector(vector, t1: float = SEASONAL_T1, t2: float = SEASONAL_T2, validate: bool = True) -> 'GabillonParams':
        lam, mu1, mu2, sigma_s, sigma_l, rho = (float(v) for v in vector)
        return GabillonParams(lam, mu1, mu2, sigma_s, sigma_l, rho, t1=t1, t2=t2, validate=validate)

    def to_dict(self) -> dict[str, float]:
        values = dict(zip(PARAM_NAMES, (float(v) for v in self.to_vector())))
        values['t1'] = self.t1
        values['t2'] = self.t2
        return values

    @staticmethod
    def from_dict(values: Mapping[str, Any]) -> 'GabillonParams':
        missing = [name for name in PARAM_NAMES if name not in values]
        if missing:
            raise DomainError(f'futures parameters lack {", ".join(missing)}')
        return GabillonParams.from_vector(
            [values[name] for name in PARAM_NAMES],
            t1=values.get('t1', SEASONAL_T1),
            t2=values.get('t2', SEASONAL_T2),
        )

    def save(self, path: str):
        write_flat(path, self.to_dict(), header='seasonal two-factor futures curve parameters')

    @staticmethod
    def load(path: str) -> 'GabillonParams':
        return GabillonParams.from_dict(read_flat(path))

    @staticmethod
    def reference() -> 'GabillonParams':
        return GabillonParams.from_dict(REFERENCE_GABILLON)


def seasonal_vol(t: ArrayOrFloat, p: GabillonParams) -> ArrayOrFloat:
    """phi(t) = 1 + mu1 cos(2 pi (t - t1)) + mu2 cos(4 pi (t - t2)), t in year fractions"""
    return 1.0 + p.mu1 * np.cos(2 * np.pi * (t - p.t1)) + p.mu2 * np.cos(4 * np.pi * (t - p.t2))


def clip_rho(rho: float) -> float:
    return float(np.clip(rho, -RHO_BOUND, RHO_BOUND))
