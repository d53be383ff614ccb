"""
Polynomial chaos basis: truncated multi-index sets and orthonormal
Hermite / Legendre evaluation.

Multi-indices are ordered by (total degree, lexicographic), so index 0 is
always the constant term and LARS paths are reproducible.
"""

import itertools
import logging
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from modules.config import config
from modules.models import BasisSet, Family, PolynomialFamily, RandomVector, SampleMatrix, TruncationScheme

logger = logging.getLogger(__name__)

QNORM_TOL = 1e-10


# ============= TRUNCATION =============

def _positive_compositions(parts: int, budget: int) -> Iterator[Tuple[int, ...]]:
    """Tuples of `parts` positive integers with sum <= budget"""
    if parts == 0:
        yield ()
        return
    for first in range(1, budget - parts + 2):
        for rest in _positive_compositions(parts - 1, budget - first):
            yield (first,) + rest


def q_norm(alpha: Sequence[int], q: float) -> float:
    nonzero = np.asarray([a for a in alpha if a > 0], dtype=float)
    if nonzero.size == 0:
        return 0.0
    return float(np.sum(nonzero ** q) ** (1.0 / q))


def generate_basis(dimension: int, scheme: TruncationScheme,
                   families: Optional[Sequence[PolynomialFamily]] = None) -> BasisSet:
    """
    All multi-indices with (sum alpha_i^q)^(1/q) <= p and at most r non-zero
    entries. With q=1 and no rank limit the count is C(M+p, p).
    """
    if dimension < 1:
        raise ValueError(f"basis dimension must be >= 1, got {dimension}")
    families = tuple(families) if families is not None else (PolynomialFamily.HERMITE,) * dimension
    if len(families) != dimension:
        raise ValueError(f"{len(families)} polynomial families for {dimension} inputs")

    p, q = scheme.max_degree, scheme.q_norm
    max_rank = min(dimension, p, scheme.max_interaction or dimension)

    indices = [(0,) * dimension]
    # q <= 1 means the q-norm dominates the total degree, so sum(alpha) <= p prunes safely
    for rank in range(1, max_rank + 1):
        for degrees in _positive_compositions(rank, p):
            if q < 1 and q_norm(degrees, q) > p + QNORM_TOL:
                continue
            for coords in itertools.combinations(range(dimension), rank):
                alpha = [0] * dimension
                for c, d in zip(coords, degrees):
                    alpha[c] = d
                indices.append(tuple(alpha))

    indices.sort(key=lambda a: (sum(a), a))
    logger.debug("Basis M=%d p=%d q=%.2f r=%s: %d terms",
                 dimension, p, q, scheme.max_interaction, len(indices))
    return BasisSet(
        indices=np.array(indices, dtype=np.int64).reshape(-1, dimension),
        scheme=scheme,
        families=families,
    )


def basis_families(rv: RandomVector) -> Tuple[PolynomialFamily, ...]:
    """Legendre for uniform inputs outside any copula coupling, Hermite otherwise"""
    R = rv.correlation
    families = []
    for i, m in enumerate(rv.marginals):
        coupled = np.any(np.delete(R[i], i) != 0)
        if m.family == Family.UNIFORM and not coupled:
            families.append(PolynomialFamily.LEGENDRE)
        else:
            families.append(PolynomialFamily.HERMITE)
    return tuple(families)


# ============= UNIVARIATE POLYNOMIALS =============

def hermite_table(max_degree: int, u: np.ndarray) -> np.ndarray:
    """
    Orthonormal probabilists' Hermite polynomials psi_0..psi_k at u, shape (N, k+1).
    psi_{k+1} = (u psi_k - sqrt(k) psi_{k-1}) / sqrt(k+1), i.e. He_k / sqrt(k!).
    """
    u = np.asarray(u, dtype=float)
    table = np.empty(u.shape + (max_degree + 1,))
    table[..., 0] = 1.0
    if max_degree >= 1:
        table[..., 1] = u
    for k in range(1, max_degree):
        table[..., k + 1] = (u * table[..., k] - np.sqrt(k) * table[..., k - 1]) / np.sqrt(k + 1)
    return table


def legendre_table(max_degree: int, t: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre polynomials on [-1, 1] w.r.t. the uniform measure"""
    t = np.asarray(t, dtype=float)
    table = np.empty(t.shape + (max_degree + 1,))
    table[..., 0] = 1.0
    if max_degree >= 1:
        table[..., 1] = t
    for k in range(1, max_degree):
        table[..., k + 1] = ((2 * k + 1) * t * table[..., k] - k * table[..., k - 1]) / (k + 1)
    return table * np.sqrt(2 * np.arange(max_degree + 1) + 1)


def eval_hermite_orthonormal(k: int, u):
    if k < 0:
        raise ValueError(f"polynomial degree must be >= 0, got {k}")
    return hermite_table(k, u)[..., k]


def eval_legendre_orthonormal(k: int, t):
    if k < 0:
        raise ValueError(f"polynomial degree must be >= 0, got {k}")
    return legendre_table(k, t)[..., k]


def univariate_table(family: PolynomialFamily, max_degree: int, u: np.ndarray) -> np.ndarray:
    """Polynomials of one input evaluated at standard-normal coordinates u"""
    if family == PolynomialFamily.LEGENDRE:
        return legendre_table(max_degree, 2.0 * ndtr(u) - 1.0)
    return hermite_table(max_degree, u)


# ============= DESIGN MATRIX =============

def design_matrix(basis: BasisSet, U) -> np.ndarray:
    """
    N x P matrix of Psi_alpha(u) = prod_d phi_{alpha_d}(u_d).
    U holds standard-normal coordinates; column 0 is all ones.
    """
    values = U.values if isinstance(U, SampleMatrix) else np.asarray(U, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, basis.dimension)
    if values.shape[1] != basis.dimension:
        raise ValueError(
            f"points have {values.shape[1]} coordinates, basis has dimension {basis.dimension}"
        )
    n = values.shape[0]
    psi = np.ones((n, basis.size))
    for d in range(basis.dimension):
        degrees = basis.indices[:, d]
        top = int(degrees.max())
        if top == 0:
            continue
        if top > config.MAX_DEGREE:
            raise ValueError(f"degree {top} exceeds the supported maximum {config.MAX_DEGREE}")
        table = univariate_table(basis.families[d], top, values[:, d])
        psi *= table[:, degrees]
    return psi
