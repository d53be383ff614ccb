"""
Test suite for the polynomial chaos basis - truncation, ordering, orthonormality
Run with: pytest modules/tests/test_chaos_basis.py -v
"""

import itertools
import math

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_hermitenorm

from modules.benchmarks import standard_normal_inputs
from modules.chaos_basis import (
    basis_families, design_matrix, eval_hermite_orthonormal, eval_legendre_orthonormal,
    generate_basis, hermite_table, legendre_table, q_norm,
)
from modules.input_model import build_random_vector, marginal_from_moments, uniform
from modules.models import Family, PolynomialFamily, TruncationScheme


def _gauss_hermite_grid(dimension: int, n_nodes: int = 20):
    """Tensor Gauss-Hermite nodes and weights for the standard normal measure"""
    nodes, weights = hermegauss(n_nodes)
    weights = weights / math.sqrt(2 * math.pi)
    grid = np.array(list(itertools.product(nodes, repeat=dimension)))
    w = np.prod(np.array(list(itertools.product(weights, repeat=dimension))), axis=1)
    return grid, w


# ============= TRUNCATION TESTS =============

def test_total_degree_count_is_binomial():
    basis = generate_basis(2, TruncationScheme(max_degree=5))
    assert basis.size == math.comb(7, 5) == 21


@pytest.mark.parametrize("dimension,degree", [(1, 4), (3, 3), (4, 2), (5, 4)])
def test_total_degree_counts(dimension, degree):
    basis = generate_basis(dimension, TruncationScheme(max_degree=degree))
    assert basis.size == math.comb(dimension + degree, degree)


def test_interaction_rank_limit():
    basis = generate_basis(3, TruncationScheme(max_degree=3, max_interaction=2))
    assert basis.size == 19
    assert (1, 1, 1) not in {tuple(row) for row in basis.indices}


def test_hyperbolic_truncation_membership():
    basis = generate_basis(2, TruncationScheme(max_degree=3, q_norm=0.75))
    kept = {tuple(row) for row in basis.indices}
    expected = {
        alpha for alpha in itertools.product(range(4), repeat=2)
        if sum(alpha) <= 3 and q_norm(alpha, 0.75) <= 3 + 1e-10
    }
    assert kept == expected
    assert (2, 1) not in kept and (1, 2) not in kept
    assert (1, 1) in kept and (3, 0) in kept
    assert basis.size == 8


def test_ordering_constant_first_then_degree():
    basis = generate_basis(3, TruncationScheme(max_degree=4, q_norm=0.8))
    rows = [tuple(r) for r in basis.indices]
    assert rows[0] == (0, 0, 0)
    assert rows == sorted(rows, key=lambda a: (sum(a), a))
    assert len(set(rows)) == len(rows)


def _index_set(dimension: int, **scheme) -> set:
    return {tuple(row) for row in generate_basis(dimension, TruncationScheme(**scheme)).indices}


def test_truncation_sets_are_nested():
    for dimension in (2, 3, 4):
        for degree in (2, 4, 6):
            by_q = [_index_set(dimension, max_degree=degree, q_norm=q) for q in (0.4, 0.6, 0.75, 0.9, 1.0)]
            assert all(small <= large for small, large in zip(by_q, by_q[1:]))

            by_rank = [_index_set(dimension, max_degree=degree, q_norm=0.75, max_interaction=r)
                       for r in range(1, dimension + 1)]
            assert all(small <= large for small, large in zip(by_rank, by_rank[1:]))
            assert by_rank[-1] == by_q[2]

        by_degree = [_index_set(dimension, max_degree=p, q_norm=0.75) for p in range(1, 8)]
        assert all(small <= large for small, large in zip(by_degree, by_degree[1:]))


def test_invalid_dimension_rejected():
    with pytest.raises(ValueError):
        generate_basis(0, TruncationScheme(max_degree=2))


# ============= UNIVARIATE POLYNOMIAL TESTS =============

def test_hermite_values():
    assert eval_hermite_orthonormal(0, 3.7) == pytest.approx(1.0)
    assert eval_hermite_orthonormal(2, 0.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    assert eval_hermite_orthonormal(3, 2.0) == pytest.approx(2 / math.sqrt(6), abs=1e-12)
    assert eval_hermite_orthonormal(3, 2.0) == pytest.approx(0.8164966, abs=1e-7)


def test_hermite_recurrence_stable_to_degree_twenty():
    u = np.linspace(-8.0, 8.0, 321)
    table = hermite_table(20, u)
    assert np.all(np.isfinite(table))
    for k in range(21):
        reference = eval_hermitenorm(k, u) / math.sqrt(math.factorial(k))
        np.testing.assert_allclose(table[:, k], reference, rtol=1e-10,
                                   atol=1e-12 * np.abs(reference).max())


def test_legendre_values():
    assert eval_legendre_orthonormal(0, 0.3) == pytest.approx(1.0)
    assert eval_legendre_orthonormal(1, 1.0) == pytest.approx(math.sqrt(3), abs=1e-14)
    assert eval_legendre_orthonormal(2, 0.0) == pytest.approx(-math.sqrt(5) / 2, abs=1e-14)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        eval_hermite_orthonormal(-1, 0.0)


@pytest.mark.parametrize("dimension,degree", [(1, 10), (2, 10), (3, 6)])
def test_hermite_basis_orthonormal(dimension, degree):
    basis = generate_basis(dimension, TruncationScheme(max_degree=degree))
    grid, w = _gauss_hermite_grid(dimension)
    psi = design_matrix(basis, grid)
    gram = psi.T @ (w[:, None] * psi)
    assert np.max(np.abs(gram - np.eye(basis.size))) < 1e-10


def test_legendre_orthonormal_under_uniform():
    nodes, weights = leggauss(20)
    table = legendre_table(10, nodes)
    gram = table.T @ (weights[:, None] / 2 * table)
    assert np.max(np.abs(gram - np.eye(11))) < 1e-10


# ============= DESIGN MATRIX TESTS =============

def test_design_matrix_hand_evaluation():
    basis = generate_basis(1, TruncationScheme(max_degree=2))
    psi = design_matrix(basis, np.array([[1.0]]))
    np.testing.assert_allclose(psi[0], [1.0, 1.0, 0.0], atol=1e-15)


def test_design_matrix_odd_terms_vanish_at_origin():
    basis = generate_basis(2, TruncationScheme(max_degree=4))
    psi = design_matrix(basis, np.zeros((1, 2)))
    odd = np.any(basis.indices % 2 == 1, axis=1)
    assert np.all(psi[0, odd] == 0.0)
    assert psi[0, 0] == 1.0


def test_design_matrix_empty_input():
    basis = generate_basis(2, TruncationScheme(max_degree=3))
    assert design_matrix(basis, np.empty((0, 2))).shape == (0, basis.size)


def test_design_matrix_dimension_mismatch():
    basis = generate_basis(2, TruncationScheme(max_degree=3))
    with pytest.raises(ValueError):
        design_matrix(basis, np.zeros((4, 3)))


def test_uniform_inputs_use_legendre_unless_coupled():
    independent = build_random_vector([uniform(0.0, 1.0), marginal_from_moments(Family.GAUSSIAN, 0.0, 1.0)])
    assert basis_families(independent) == (PolynomialFamily.LEGENDRE, PolynomialFamily.HERMITE)

    coupled = build_random_vector(
        [uniform(0.0, 1.0), marginal_from_moments(Family.GAUSSIAN, 0.0, 1.0)],
        np.array([[1.0, 0.3], [0.3, 1.0]]),
    )
    assert basis_families(coupled) == (PolynomialFamily.HERMITE, PolynomialFamily.HERMITE)
    assert basis_families(standard_normal_inputs(3)) == (PolynomialFamily.HERMITE,) * 3
