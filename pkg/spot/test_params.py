import numpy as np
import pytest

from constants import REFERENCE_SPOT_MODEL1
from errors import ConfigError, DomainError

from .params import GarchParams, SpikeParams, SpotParams


def test_reference_values():
    p = SpotParams.reference(1)
    assert p.a2 == REFERENCE_SPOT_MODEL1['a2']
    assert p.garch.gamma1 == pytest.approx(0.8764)
    assert p.spike_pos.window == [1, 2, 6]
    assert p.spikes_enabled
    assert SpotParams.reference(2).model_id == 2


def test_save_and_load(tmp_path):
    p = SpotParams.reference(2)
    path = str(tmp_path / 'params' / 'spot.toml')
    p.save(path)
    assert SpotParams.load(path) == p
    with open(path) as f:
        assert 'garch.kappa = ' in f.read()


def test_nested_and_flat_keys_agree():
    flat = SpotParams.from_dict(REFERENCE_SPOT_MODEL1)
    assert SpotParams.from_dict(flat.to_dict()) == flat


def test_missing_keys():
    values = dict(REFERENCE_SPOT_MODEL1)
    del values['a3']
    with pytest.raises(DomainError, match='a3'):
        SpotParams.from_dict(values)


def test_only_first_order_garch():
    with pytest.raises(ConfigError):
        GarchParams(1e-5, [0.5, 0.2], [0.1]).validate()


@pytest.mark.parametrize('garch', [
    GarchParams(0.0, [0.8], [0.1]),
    GarchParams(1e-5, [0.9], [0.2]),
    GarchParams(1e-5, [-0.1], [0.2]),
])
def test_invalid_garch(garch):
    with pytest.raises(DomainError):
        garch.validate()


def test_unknown_model():
    p = SpotParams.reference(1)
    with pytest.raises(ConfigError):
        SpotParams(3, p.a1, p.a2, p.a3, p.garch, p.spike_pos, p.spike_neg)


def test_spike_validation():
    with pytest.raises(DomainError):
        SpikeParams(intensity=1.0, window=[]).validate()
    with pytest.raises(DomainError):
        SpikeParams(beta=0.0).validate()
    with pytest.raises(DomainError):
        SpikeParams(intensity=1.0, window=[13]).validate()


def test_without_spikes_keeps_the_rest():
    p = SpotParams.reference(1)
    quiet = p.without_spikes()
    assert not quiet.spikes_enabled
    assert np.array_equal(quiet.to_theta(), p.to_theta())
    assert quiet.spike_neg.jump_mean == p.spike_neg.jump_mean
    assert p.spikes_enabled


def test_theta_round_trip():
    p = SpotParams.reference(1)
    theta = p.to_theta() * 1.01
    moved = p.with_theta(theta)
    assert np.allclose(moved.to_theta(), theta)
    assert moved.spike_pos.to_dict() == p.spike_pos.to_dict()
    with pytest.raises(DomainError):
        p.with_theta([0.0, 0.2, 0.4, 1e-5, 0.7, 0.5])
