"""
Test suite for the built-in problems - test functions, truss solver and frame inputs
Run with: pytest modules/tests/test_benchmarks.py -v
"""

import math

import numpy as np
import pytest

from modules.benchmarks import (
    available, four_branch, frame_copula, frame_input_spec, get_benchmark, linear_oracle_spec,
    sinc_1d, sinc_1d_demo, truss_inputs, truss_spec,
)
from modules.input_model import sample_mcs, to_standard
from modules.truss import N_BAYS, TrussModel, truss_displacement, warren_truss


# ============= FIXTURES =============

@pytest.fixture
def truss_points():
    """100 random truss input vectors"""
    return sample_mcs(truss_inputs(), 100, np.random.default_rng(12)).values


@pytest.fixture
def truss_mean():
    return np.array([2.0e-3, 1.0e-3, 2.1e11, 2.1e11] + [5.0e4] * 6)


def _group_rigidities(truss: TrussModel, x: np.ndarray) -> np.ndarray:
    ea = np.array([x[0] * x[2], x[1] * x[3]])
    return ea[truss.groups]


def _top_loads(truss: TrussModel, x: np.ndarray) -> np.ndarray:
    F = np.zeros(truss.n_dof)
    for i in range(N_BAYS):
        F[2 * (N_BAYS + 1 + i) + 1] = -x[4 + i]
    return F


# ============= TEST FUNCTION TESTS =============

def test_sinc_values():
    assert sinc_1d(0.0) == 0.0
    assert sinc_1d(math.pi / 2) == pytest.approx(math.pi / 2, abs=1e-15)
    assert sinc_1d(math.pi) == pytest.approx(0.0, abs=1e-12)


def test_four_branch_values():
    assert four_branch(0.0, 0.0) == pytest.approx(3.0, abs=1e-15)
    assert four_branch(0.0, 5.0) == pytest.approx(-5.0 + 6 / math.sqrt(2), abs=1e-12)
    assert four_branch(0.0, 5.0) == pytest.approx(-0.75736, abs=1e-5)


def test_four_branch_symmetry():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(50), rng.standard_normal(50)
    np.testing.assert_allclose(four_branch(a, b), four_branch(b, a), atol=1e-14)


def test_four_branch_reference_probability():
    U = np.random.default_rng(2).standard_normal((1_000_000, 2))
    pf = np.mean(four_branch(U[:, 0], U[:, 1]) <= 0)
    assert 4.1e-3 <= pf <= 4.8e-3


# ============= TRUSS SOLVER TESTS =============

def test_warren_truss_topology():
    truss = warren_truss()
    assert truss.nodes.shape == (13, 2)
    assert truss.elements.shape == (23, 2)
    assert np.count_nonzero(truss.groups == 0) == 11
    assert np.count_nonzero(truss.groups == 1) == 12


def test_single_bar_elongation():
    length, area, modulus, force = 3.0, 1.5e-3, 2.0e11, 4.0e4
    bar = TrussModel(nodes=[[0.0, 0.0], [length, 0.0]], elements=[[0, 1]], groups=[0],
                     supports={0: (True, True), 1: (False, True)})
    loads = np.array([0.0, 0.0, force, 0.0])
    U, reactions = bar.solve([area * modulus], loads)
    assert U[2] == pytest.approx(force * length / (modulus * area), rel=1e-12)
    assert reactions[0] == pytest.approx(-force, rel=1e-12)


def test_stiffness_symmetric():
    truss = warren_truss()
    K = truss.stiffness(np.linspace(1.0, 2.0, 23))
    np.testing.assert_allclose(K, K.T, atol=1e-9)


def test_mechanism_rejected():
    bar = TrussModel(nodes=[[0.0, 0.0], [1.0, 0.0]], elements=[[0, 1]], groups=[0], supports={0: (True, True)})
    with pytest.raises(ValueError):
        bar.solve([1.0], np.array([0.0, 0.0, 0.0, 1.0]))


def test_truss_equilibrium(truss_points):
    truss = warren_truss()
    for x in truss_points[:20]:
        F = _top_loads(truss, x)
        U, reactions = truss.solve(_group_rigidities(truss, x), F)
        total = (F + reactions).reshape(-1, 2).sum(axis=0)
        assert np.max(np.abs(total)) <= 1e-6 * np.abs(F).sum()
        np.testing.assert_allclose(reactions[truss.free_dofs], 0.0, atol=1e-6 * np.abs(F).sum())


def test_batched_deflection_matches_generic_solver(truss_points):
    truss = warren_truss()
    batched = truss_displacement(truss_points)
    for x, u in zip(truss_points[:20], batched[:20]):
        U, _ = truss.solve(_group_rigidities(truss, x), _top_loads(truss, x))
        assert u == pytest.approx(-U[2 * 3 + 1], rel=1e-10)


def test_deflection_scaling_laws(truss_points):
    base = truss_displacement(truss_points)
    assert np.all(base > 0)

    doubled_loads = truss_points.copy()
    doubled_loads[:, 4:] *= 2
    np.testing.assert_allclose(truss_displacement(doubled_loads), 2 * base, rtol=1e-10)

    stiffer = truss_points.copy()
    stiffer[:, 2:4] *= 2
    np.testing.assert_allclose(truss_displacement(stiffer), base / 2, rtol=1e-10)


def test_deflection_at_mean_is_realistic(truss_mean):
    u = truss_displacement(truss_mean)[0]
    assert 0.01 < u < 0.12


def test_truss_rejects_non_positive_properties(truss_mean):
    x = truss_mean.copy()
    x[0] = 0.0
    with pytest.raises(ValueError):
        truss_displacement(x)


# ============= BENCHMARK SPEC TESTS =============

def test_truss_spec_threshold_and_reference():
    spec = truss_spec()
    assert spec.random_vector.dimension == 10
    assert spec.limit_state.threshold == 0.12
    assert spec.reference_pf == pytest.approx(1.52e-3)


def test_linear_oracle_spec():
    spec = linear_oracle_spec()
    assert spec.random_vector.dimension == 1
    assert spec.reference_pf == pytest.approx(1.3499e-3, abs=1e-7)
    assert spec.reference_beta == pytest.approx(3.0, abs=1e-12)


def test_benchmark_registry():
    assert set(available()) == {"four_branch", "truss", "linear_oracle", "sinc_1d"}
    assert get_benchmark("four_branch").reference_pf == pytest.approx(4.460e-3)
    with pytest.raises(ValueError):
        get_benchmark("cantilever")


# ============= FRAME INPUT TESTS =============

def test_frame_copula_structure():
    R = frame_copula()
    assert R.shape == (21, 21)
    np.testing.assert_array_equal(R, R.T)
    np.testing.assert_array_equal(np.diag(R), 1.0)
    assert R[3, 4] == 0.9
    assert R[13, 5] == 0.95          # A14 with I6
    assert R[14, 5] == 0.13          # A15 with I6
    assert R[0, 5] == 0.0
    assert np.linalg.eigvalsh(R).min() > 0


def test_frame_empirical_correlations():
    rv = frame_input_spec()
    assert rv.dimension == 21
    X = sample_mcs(rv, 100_000, np.random.default_rng(21)).values
    assert np.all(X[:, 3:] > 0)
    U = to_standard(rv, X).values
    Z = U @ rv.cholesky_factor.T
    assert np.max(np.abs(np.corrcoef(Z, rowvar=False) - rv.correlation)) < 0.02


# ============= BAND DEMO TESTS =============

def test_sinc_band_demo():
    demo = sinc_1d_demo(seed=0)
    assert demo['grid'].shape == (200,)
    assert demo['trajectories'].shape == (100, 200)
    assert np.all(demo['lower'] <= demo['upper'])

    inside = (demo['lower'] <= demo['true']) & (demo['true'] <= demo['upper'])
    assert inside.mean() >= 0.6

    if np.max(np.abs(demo['design_fit'] - demo['design_y'])) < 1e-10:
        width = demo['design_upper'] - demo['design_lower']
        assert np.all(width < 1e-6 * np.maximum(1.0, np.abs(demo['design_y'])))
