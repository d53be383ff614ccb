"""
Test suite for bootstrap ensembles - resampling, replicate refits and quantile bands
Run with: pytest modules/tests/test_bootstrap.py -v
"""

import numpy as np
import pytest

from modules.benchmarks import standard_normal_inputs
from modules.bootstrap import (
    band_from_predictions, ensemble_predict, fit_ensemble, quantile_band, resample_indices,
)
from modules.input_model import sample_lhs
from modules.models import AdaptiveConfig, BootstrapMode, ExperimentalDesign
from modules.regression import adaptive_fit, predict


def _quadratic(U):
    return 2.0 - U[:, 0] + 0.4 * U[:, 0] * U[:, 1] + 0.2 * U[:, 1] ** 2


# ============= FIXTURES =============

@pytest.fixture
def exact_design():
    """60 LHS points of an exactly representable degree-2 model"""
    rv = standard_normal_inputs(2)
    X = sample_lhs(rv, 60, np.random.default_rng(8)).values
    ed = ExperimentalDesign(inputs=X, responses=_quadratic(X))
    return rv, ed, adaptive_fit(ed, rv, AdaptiveConfig(p_min=1, p_max=4))


def _noisy_design(n: int, seed: int):
    rv = standard_normal_inputs(1)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 1))
    return rv, ExperimentalDesign(inputs=X, responses=1.0 + X[:, 0] + 0.5 * rng.standard_normal(n))


# ============= RESAMPLING TESTS =============

def test_resample_rejects_small_inputs():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        resample_indices(1, 10, rng)
    with pytest.raises(ValueError):
        resample_indices(10, 1, rng)


def test_resample_distinct_fraction():
    idx = resample_indices(1000, 100, np.random.default_rng(1))
    assert idx.shape == (100, 1000)
    assert idx.min() >= 0 and idx.max() <= 999
    distinct = np.mean([np.unique(row).size / 1000 for row in idx])
    assert distinct == pytest.approx(1 - np.exp(-1), abs=0.02)


def test_resample_deterministic_per_seed():
    a = resample_indices(50, 20, np.random.default_rng(42))
    b = resample_indices(50, 20, np.random.default_rng(42))
    np.testing.assert_array_equal(a, b)


# ============= ENSEMBLE TESTS =============

def test_fast_replicates_reproduce_exact_fit(exact_design):
    rv, ed, full = exact_design
    ens = fit_ensemble(ed, full, BootstrapMode.FAST, 20, np.random.default_rng(2))
    assert ens.B == 20
    for coefficients in ens.coefficients:
        np.testing.assert_allclose(coefficients, full.sparse_coefficients, atol=1e-8)


def test_full_replicates_reproduce_exact_fit(exact_design):
    rv, ed, full = exact_design
    ens = fit_ensemble(ed, full, BootstrapMode.FULL, 3, np.random.default_rng(2),
                       AdaptiveConfig(p_min=1, p_max=4))
    assert len(ens.bases) == 3
    points = np.random.default_rng(5).standard_normal((50, 2))
    preds = ensemble_predict(ens, points)
    for row in preds:
        np.testing.assert_allclose(row, predict(full, points), rtol=1e-6, atol=1e-6)


def test_minimal_ensemble(exact_design):
    rv, ed, full = exact_design
    ens = fit_ensemble(ed, full, BootstrapMode.FAST, 2, np.random.default_rng(0))
    assert ens.B == 2
    assert ensemble_predict(ens, ed.inputs[:3]).shape == (2, 3)


def test_replicate_spread_shrinks_with_design_size():
    def spread(n):
        stds = []
        for seed in range(20):
            rv, ed = _noisy_design(n, seed)
            full = adaptive_fit(ed, rv, AdaptiveConfig(p_min=1, p_max=1))
            ens = fit_ensemble(ed, full, BootstrapMode.FAST, 50, np.random.default_rng(seed))
            stds.append(np.std([c[0] for c in ens.coefficients]))
        return np.mean(stds)

    assert spread(200) < spread(50)


def test_replicate_mean_tracks_full_fit():
    rv, ed = _noisy_design(80, 4)
    full = adaptive_fit(ed, rv, AdaptiveConfig(p_min=1, p_max=2))
    ens = fit_ensemble(ed, full, BootstrapMode.FAST, 100, np.random.default_rng(4))
    preds = ensemble_predict(ens, ed.inputs)
    deviation = np.abs(preds.mean(axis=0) - predict(full, ed.inputs))
    assert np.all(deviation <= 2 * preds.std(axis=0) + 1e-12)


def test_ensemble_predict_deterministic(exact_design):
    rv, ed, full = exact_design
    ens = fit_ensemble(ed, full, BootstrapMode.FAST, 10, np.random.default_rng(6))
    np.testing.assert_array_equal(ensemble_predict(ens, ed.inputs), ensemble_predict(ens, ed.inputs))
    assert ensemble_predict(ens, np.empty((0, 2))).shape == (10, 0)


# ============= QUANTILE BAND TESTS =============

def test_band_linear_interpolation_rule():
    values = np.arange(1, 101, dtype=float).reshape(-1, 1)
    lower, upper = band_from_predictions(values, 0.95)
    assert lower[0] == pytest.approx(3.475, abs=1e-12)
    assert upper[0] == pytest.approx(97.525, abs=1e-12)


def test_band_of_equal_replicates_is_degenerate():
    lower, upper = band_from_predictions(np.full((30, 4), 2.5))
    np.testing.assert_array_equal(lower, 2.5)
    np.testing.assert_array_equal(upper, 2.5)


def test_band_narrows_with_level():
    values = np.random.default_rng(0).standard_normal((100, 5))
    previous = None
    for level in (0.99, 0.95, 0.8, 0.5):
        lower, upper = band_from_predictions(values, level)
        width = upper - lower
        if previous is not None:
            assert np.all(width <= previous + 1e-15)
        previous = width


def test_band_level_must_be_open_unit_interval(exact_design):
    rv, ed, full = exact_design
    ens = fit_ensemble(ed, full, BootstrapMode.FAST, 5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        quantile_band(ens, ed.inputs, 1.0)
    with pytest.raises(ValueError):
        band_from_predictions(np.zeros((5, 2)), 0.0)
