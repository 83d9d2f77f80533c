from copy import deepcopy
from typing import Any, Mapping, Optional

import numpy as np

from constants import REFERENCE_SPOT_MODEL1, SPIKE_BETA
from errors import ConfigError, DomainError
from paramfile import read_flat, write_flat

MODEL_IDS = [1, 2]

# the parameters perturbed when building model families, in vector order
THETA_NAMES = ['a1', 'a2', 'a3', 'garch.kappa', 'garch.gamma', 'garch.alpha']


class SpikeParams:
    beta: float
    intensity: float
    jump_mean: float
    jump_std: float
    window: list[int]

    def __init__(self, beta: float = SPIKE_BETA, intensity: float = 0.0, jump_mean: float = 0.0, jump_std: float = 0.0, window: Optional[list[int]] = None):
        self.beta = float(beta)
        self.intensity = float(intensity)
        self.jump_mean = float(jump_mean)
        self.jump_std = float(jump_std)
        self.window = sorted(int(m) for m in window or [])

    def __repr__(self):
        return f'SpikeParams(beta={self.beta:g}, intensity={self.intensity:.4g}, N({self.jump_mean:.4g}, {self.jump_std:.4g}), window={self.window})'

    def validate(self):
        if not self.beta > 0:
            raise DomainError(f'spike reversion speed must be positive, got {self.beta}')
        if self.intensity < 0:
            raise DomainError(f'spike intensity must not be negative, got {self.intensity}')
        if self.jump_std < 0:
            raise DomainError(f'jump size deviation must not be negative, got {self.jump_std}')
        if self.intensity > 0 and not self.window:
            raise DomainError('spike window is empty although the intensity is positive')
        if any(m < 1 or m > 12 for m in self.window):
            raise DomainError(f'spike window has invalid months {self.window}')

    def to_dict(self) -> dict[str, Any]:
        return {
            'beta': self.beta,
            'intensity': self.intensity,
            'jump_mean': self.jump_mean,
            'jump_std': self.jump_std,
            'window': list(self.window),
        }

    @staticmethod
    def from_dict(values: Mapping[str, Any]) -> 'SpikeParams':
        return SpikeParams(**{key: values[key] for key in ['beta', 'intensity', 'jump_mean', 'jump_std', 'window'] if key in values})

    def disabled(self) -> 'SpikeParams':
        quiet = deepcopy(self)
        quiet.intensity = 0.0
        return quiet


class GarchParams:
    kappa: float
    gamma: list[float]
    alpha: list[float]

    def __init__(self, kappa: float, gamma: list[float], alpha: list[float]):
        self.kappa = float(kappa)
        self.gamma = [float(g) for g in gamma]
        self.alpha = [float(a) for a in alpha]

    def __repr__(self):
        return f'GarchParams(kappa={self.kappa:.4g}, gamma={self.gamma}, alpha={self.alpha})'

    def persistence(self) -> float:
        return sum(self.gamma) + sum(self.alpha)

    def is_stationary(self) -> bool:
        return self.kappa > 0 and self.persistence() < 1 and min(self.gamma + self.alpha, default=0.0) >= 0

    def unconditional_variance(self) -> float:
        return self.kappa / (1 - self.persistence())

    def check_order(self):
        if len(self.gamma) != 1 or len(self.alpha) != 1:
            raise ConfigError(f'only GARCH(1,1) is supported, got p={len(self.gamma)}, q={len(self.alpha)}')

    def validate(self):
        self.check_order()
        if not self.kappa > 0:
            raise DomainError(f'GARCH kappa must be positive, got {self.kappa}')
        if min(self.gamma + self.alpha) < 0:
            raise DomainError(f'GARCH coefficients must not be negative: {self}')
        if not self.persistence() < 1:
            raise DomainError(f'GARCH coefficients are not covariance stationary (sum {self.persistence():.6g})')

    @property
    def gamma1(self) -> float:
        return self.gamma[0]

    @property
    def alpha1(self) -> float:
        return self.alpha[0]


class SpotParams:
    model_id: int
    a1: float
    a2: float
    a3: float
    garch: GarchParams
    spike_pos: SpikeParams
    spike_neg: SpikeParams

    def __init__(
        self,
        model_id: int,
        a1: float,
        a2: float,
        a3: float,
        garch: GarchParams,
        spike_pos: SpikeParams,
        spike_neg: SpikeParams,
        validate: bool = True,
    ):
        self.model_id = int(model_id)
        self.a1 = float(a1)
        self.a2 = float(a2)
        self.a3 = float(a3)
        self.garch = garch
        self.spike_pos = spike_pos
        self.spike_neg = spike_neg
        if validate:
            self.validate()

    def __repr__(self):
        return f'SpotParams(model {self.model_id}, a=({self.a1:.4g}, {self.a2:.4g}, {self.a3:.4g}), {self.garch})'

    def __eq__(self, other):
        return isinstance(other, SpotParams) and self.to_dict() == other.to_dict()

    def validate(self):
        if self.model_id not in MODEL_IDS:
            raise ConfigError(f'unknown spot model {self.model_id}, expected one of {MODEL_IDS}')
        self.garch.validate()
        self.spike_pos.validate()
        self.spike_neg.validate()

    @property
    def spikes_enabled(self) -> bool:
        return self.spike_pos.intensity > 0 or self.spike_neg.intensity > 0

    def without_spikes(self) -> 'SpotParams':
        return SpotParams(self.model_id, self.a1, self.a2, self.a3, deepcopy(self.garch), self.spike_pos.disabled(), self.spike_neg.disabled())

    def to_theta(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3, self.garch.kappa, self.garch.gamma1, self.garch.alpha1])

    def with_theta(self, theta, validate: bool = True) -> 'SpotParams':
        a1, a2, a3, kappa, gamma, alpha = (float(v) for v in theta)
        return SpotParams(
            self.model_id,
            a1,
            a2,
            a3,
            GarchParams(kappa, [gamma], [alpha]),
            deepcopy(self.spike_pos),
            deepcopy(self.spike_neg),
            validate=validate,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            'model_id': self.model_id,
            'a1': self.a1,
            'a2': self.a2,
            'a3': self.a3,
            'garch': {
                'kappa': self.garch.kappa,
                'gamma': list(self.garch.gamma),
                'alpha': list(self.garch.alpha),
            },
            'spike_pos': self.spike_pos.to_dict(),
            'spike_neg': self.spike_neg.to_dict(),
        }

    @staticmethod
    def from_dict(values: Mapping[str, Any]) -> 'SpotParams':
        """accepts nested blocks or flat dotted keys (`garch.kappa`, `spike_pos.beta`, ...)"""
        nested: dict[str, Any] = {}
        for key, value in values.items():
            if isinstance(value, Mapping):
                nested.setdefault(key, {}).update(value)
            elif '.' in key:
                block, name = key.split('.', 1)
                nested.setdefault(block, {})[name] = value
            else:
                nested[key] = value
        missing = [key for key in ['model_id', 'a1', 'a2', 'a3', 'garch'] if key not in nested]
        if missing:
            raise DomainError(f'spot parameters lack {", ".join(missing)}')
        garch = nested['garch']
        return SpotParams(
            nested['model_id'],
            nested['a1'],
            nested['a2'],
            nested['a3'],
            GarchParams(garch['kappa'], list(garch['gamma']), list(garch['alpha'])),
            SpikeParams.from_dict(nested.get('spike_pos', {})),
            SpikeParams.from_dict(nested.get('spike_neg', {})),
        )

    def save(self, path: str):
        write_flat(path, self.to_dict(), header=f'spot model {self.model_id} parameters')

    @staticmethod
    def load(path: str) -> 'SpotParams':
        return SpotParams.from_dict(read_flat(path))

    @staticmethod
    def reference(model_id: int = 1) -> 'SpotParams':
        """model 1 estimates of 1997-2007; model 2 reuses them on the spread scale"""
        return SpotParams.from_dict(REFERENCE_SPOT_MODEL1 | {'model_id': model_id})
