from typing_extensions import TypeAlias
from typing import TypedDict

DAYS_PER_YEAR = 365.0

VOLUME_TOLERANCE = 1e-9
REBALANCE_TOLERANCE = 1e-9

# volumes are in 10^6 MMBtu, rates per day, prices in USD/MMBtu


class StoragePreset(TypedDict):
    v_min: float
    v_max: float
    a_inj: float
    a_with: float
    v_start: float
    v_end_target: float
    lease_days: int


STORAGE_PRESETS: dict[str, StoragePreset] = {
    'fast': {
        'v_min': 0.0,
        'v_max': 100.0,
        'a_inj': 4.0,
        'a_with': 6.0,
        'v_start': 0.0,
        'v_end_target': 0.0,
        'lease_days': 365,
    },
    'slow': {
        'v_min': 0.0,
        'v_max': 100.0,
        'a_inj': 0.8,
        'a_with': 1.2,
        'v_start': 0.0,
        'v_end_target': 0.0,
        'lease_days': 365,
    },
}

# seasonal anchors: January and August, as year fractions
SEASONAL_T1 = 0.0
SEASONAL_T2 = 7.0 / 12.0

# futures curve parameters estimated on 1997-2007 curves
REFERENCE_GABILLON = {
    'lambda': 0.7896,
    'mu1': 0.0246,
    'mu2': 0.0038,
    't1': SEASONAL_T1,
    't2': SEASONAL_T2,
    'sigma_S': 0.4580,
    'sigma_L': 0.1655,
    'rho': 0.4113,
}

# spot model 1 parameters estimated on 1997-2007 data
REFERENCE_SPOT_MODEL1 = {
    'model_id': 1,
    'a1': -0.0044,
    'a2': 0.2622,
    'a3': 0.4467,
    'garch.kappa': 1.6928e-5,
    'garch.gamma': [0.8764],
    'garch.alpha': [0.1138],
    'spike_pos.beta': 300.0,
    'spike_pos.intensity': 0.8331,
    'spike_pos.jump_mean': 0.2579,
    'spike_pos.jump_std': 0.3910,
    'spike_pos.window': [1, 2, 6],
    'spike_neg.beta': 300.0,
    'spike_neg.intensity': 2.9488,
    'spike_neg.jump_mean': -0.7624,
    'spike_neg.jump_std': 0.6402,
    'spike_neg.window': [9, 10, 11],
}

SPIKE_WINDOW_POS = [1, 2, 6]
SPIKE_WINDOW_NEG = [9, 10, 11]
SPIKE_BETA = 300.0
SPIKE_THRESHOLD_K = 3.0
MIN_SPIKE_EVENTS = 3

MODEL2_SPREAD_FLOOR = -0.95

RHO_BOUND = 0.999

MIN_PATHS = 100
MIN_BACKWARD_PATHS = 500
MAX_VOLUME_NODES = 2000
RIDGE_PENALTY = 1e-8

# random stream identifiers, combined with (seed, path index)
Stream: TypeAlias = int
STREAM_CURVES: Stream = 0
STREAM_SPOT: Stream = 1
STREAM_SPIKE_POS: Stream = 2
STREAM_SPIKE_NEG: Stream = 3
STREAM_FAMILY: Stream = 4

BASIS_QUADRATIC = 'quad3'
BASIS_SPECS = [BASIS_QUADRATIC]

ACTIONS = ['no', 'inj', 'with']

PATH_FORMATS = ['npz', 'csv']
DELTA_CHOICES = ['1', '2', 'both']

CONTAINER_VERSION = 1
