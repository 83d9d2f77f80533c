import numpy as np
import pytest

from errors import DomainError

from .regression import basis_features, basis_size, predict, regress_condexp


def test_quadratic_basis_columns():
    spot = np.array([2.0, 4.0])
    prompt = np.array([2.0, 5.0])
    x = basis_features('quad3', spot, prompt)
    assert x.shape == (2, 10)
    assert basis_size('quad3') == 10
    assert np.allclose(x[:, 0], 1.0)
    assert np.isclose(x[1, 3], -0.2)
    assert np.isclose(x[1, 7], np.log(4.0) * np.log(5.0))
    with pytest.raises(DomainError):
        basis_features('cubic', spot, prompt)


def test_exact_fit_recovers_coefficients():
    rng = np.random.default_rng(0)
    spot = np.exp(rng.normal(1.5, 0.3, 500))
    prompt = np.exp(rng.normal(1.5, 0.2, 500))
    x = basis_features('quad3', spot, prompt)
    truth = rng.normal(size=(10, 2))
    coefficients = regress_condexp(x, x @ truth)
    assert np.allclose(coefficients, truth, atol=1e-6)
    assert np.allclose(predict(x, coefficients), x @ truth)


def test_constant_design_falls_back_to_mean():
    x = basis_features('quad3', np.full(30, 3.0), np.full(30, 3.0))
    targets = np.arange(30.0)
    coefficients = regress_condexp(x, targets)
    assert np.allclose(predict(x, coefficients), targets.mean())


def test_regression_needs_more_paths_than_basis_functions():
    x = basis_features('quad3', np.ones(10), np.ones(10))
    with pytest.raises(DomainError):
        regress_condexp(x, np.zeros(10))


def test_non_finite_targets_rejected():
    x = basis_features('quad3', np.linspace(1, 2, 20), np.linspace(2, 3, 20))
    with pytest.raises(DomainError):
        regress_condexp(x, np.full(20, np.inf))
