from datetime import date

import numpy as np
import pytest

from constants import MODEL2_SPREAD_FLOOR
from curve.simulate import CurvePathSet
from errors import DomainError
from utils import daterange

from .params import GarchParams, SpotParams
from .simulate import simulate_spot_paths

DATES = daterange(date(2008, 1, 1), date(2008, 1, 21))
MATURITIES = [date(2008, 2, 1), date(2008, 3, 1), date(2008, 4, 1)]


def flat_curves(n_paths: int, prompt: float = 8.0, back: float = 8.0) -> CurvePathSet:
    prices = np.empty((n_paths, len(DATES), len(MATURITIES)))
    prices[:, :, 0] = prompt
    prices[:, :, 1:] = back
    return CurvePathSet(DATES, MATURITIES, prices)


def quiet(model_id: int, a1: float, a2: float, a3: float = 0.0) -> SpotParams:
    ref = SpotParams.reference(model_id).without_spikes()
    return SpotParams(model_id, a1, a2, a3, GarchParams(1e-12, [0.0], [0.0]), ref.spike_pos, ref.spike_neg)


def test_shapes_and_start():
    paths = simulate_spot_paths(SpotParams.reference(1), flat_curves(7), seed=3, initial_spot=7.5)
    assert paths.base.shape == (7, len(DATES))
    assert np.all(paths.base[:, 0] == 7.5)
    assert np.all(paths.spiked > 0)
    assert np.allclose(paths.spiked, paths.base * np.exp(paths.y_pos + paths.y_neg))
    # January lies outside the negative spike window
    assert np.all(paths.y_neg == 0.0)


def test_start_from_prompt_spread():
    paths = simulate_spot_paths(SpotParams.reference(2), flat_curves(2), seed=3, initial_spread=0.1)
    assert np.allclose(paths.base[:, 0], 8.8)


def test_model1_reverts_to_the_prompt():
    a2 = 0.3
    paths = simulate_spot_paths(quiet(1, 0.0, a2), flat_curves(2), seed=1, initial_spot=16.0, spikes=False)
    steps = np.arange(len(DATES))
    assert np.allclose(paths.base[0] / 8.0, 2.0**((1 - a2)**steps), rtol=1e-4)


def test_model2_spread_floor():
    paths = simulate_spot_paths(quiet(2, -2.0, 0.0), flat_curves(3), seed=1, spikes=False)
    assert np.allclose(paths.base[:, 1:], 8.0 * (1 + MODEL2_SPREAD_FLOOR))
    assert list(paths.floored) == [len(DATES) - 1] * 3


def test_parallel_chunks_match_serial():
    curves = flat_curves(300)
    serial = simulate_spot_paths(SpotParams.reference(1), curves, seed=5, n_jobs=1)
    parallel = simulate_spot_paths(SpotParams.reference(1), curves, seed=5, n_jobs=2)
    assert np.array_equal(serial.base, parallel.base)
    assert np.array_equal(serial.spiked, parallel.spiked)
    other = simulate_spot_paths(SpotParams.reference(1), curves, seed=6, n_jobs=1)
    assert not np.allclose(serial.base, other.base)


def test_invalid_start():
    with pytest.raises(DomainError):
        simulate_spot_paths(SpotParams.reference(1), flat_curves(2), seed=1, initial_spot=0.0)
