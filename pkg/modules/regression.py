"""
Sparse regression for PCE coefficients: OLS, leave-one-out error,
LARS support paths, hybrid LARS and degree-adaptive fitting.

Leave-one-out error with the small-sample correction:

    err_LOO = (1/N) sum_i ((y_i - yhat_i) / (1 - h_i))^2 / Var(y)
    eps_LOO = err_LOO * T,   T = N / (N - P_s) * (1 + tr((Psi^T Psi)^-1))

h_i are the leverages of the support columns, P_s the numerical rank of the
support and Var(y) the unbiased sample variance. tr((Psi^T Psi)^-1) equals
tr(C^-1)/N with C = Psi^T Psi / N the empirical information matrix.
"""

import logging
import warnings
from typing import List, Optional, Tuple

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import lars_path as sk_lars_path

from modules.chaos_basis import basis_families, design_matrix, generate_basis
from modules.config import config
from modules.input_model import to_standard
from modules.models import (
    AdaptiveConfig, ExperimentalDesign, PceModel, RandomVector, RegressionResult,
    SampleMatrix, TruncationScheme,
)

logger = logging.getLogger(__name__)


def _improves(candidate: float, best: float) -> bool:
    """Strict improvement; near-ties and numerically-zero differences keep the incumbent"""
    return candidate < best * (1 - 1e-9) - config.LOO_FLOOR


# ============= LEAST SQUARES =============

def ols_fit(psi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Least-squares coefficients; minimum-norm solution when rank deficient
    (singular values below 1e-12 * sigma_max treated as zero).
    """
    psi = np.asarray(psi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if psi.ndim != 2 or psi.shape[0] == 0 or psi.shape[1] == 0:
        raise ValueError(f"regression matrix must be non-empty N x P, got shape {psi.shape}")
    if psi.shape[0] != y.shape[0]:
        raise ValueError(f"{psi.shape[0]} rows but {y.shape[0]} responses")
    coefficients, *_ = np.linalg.lstsq(psi, y, rcond=config.SINGULAR_CUTOFF)
    return coefficients


def _numerical_rank(s: np.ndarray) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > config.SINGULAR_CUTOFF * s[0]))


def _loo_terms(psi: np.ndarray, y: np.ndarray, coefficients: np.ndarray,
               correction: bool = True) -> Tuple[float, float]:
    """
    Relative leave-one-out error and its standard error over the N
    per-point contributions. Both are inf for an interpolating fit.
    """
    psi = np.asarray(psi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]

    U, s, _ = np.linalg.svd(psi, full_matrices=False)
    rank = _numerical_rank(s)
    leverage = np.sum(U[:, :rank] ** 2, axis=1)
    if n <= rank or np.any(leverage >= 1 - config.LEVERAGE_TOL):
        return float("inf"), float("inf")

    residuals = y - psi @ coefficients
    variance = np.var(y, ddof=1) if n > 1 else 0.0
    if variance <= 0:
        scale = max(1.0, float(np.max(np.abs(y))))
        if np.all(np.abs(residuals) <= 1e-12 * scale):
            return 0.0, 0.0
        return float("inf"), float("inf")

    terms = (residuals / (1 - leverage)) ** 2 / variance
    if correction:
        terms *= n / (n - rank) * (1 + np.sum(1.0 / s[:rank] ** 2))
    return float(terms.mean()), float(terms.std(ddof=1) / np.sqrt(n))


def loo_error(psi: np.ndarray, y: np.ndarray, coefficients: np.ndarray,
              correction: bool = True) -> float:
    """
    Relative leave-one-out error of a least-squares fit (see module docstring).
    Returns inf when a leverage reaches 1 (interpolating fit).
    """
    return _loo_terms(psi, y, coefficients, correction)[0]


# ============= LARS =============

def lars_path(psi: np.ndarray, y: np.ndarray, max_steps: Optional[int] = None) -> List[Tuple[int, ...]]:
    """
    Nested supports from plain least-angle regression (no lasso drops).

    The constant column 0 is always included; the remaining columns are
    centered and scaled to unit norm, y is centered. Entry k of the result
    is the constant plus the first k columns that entered the active set.
    """
    psi = np.asarray(psi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = psi.shape
    if max_steps is None:
        max_steps = p - 1
    if max_steps < 1:
        if p > 1:
            raise ValueError(f"max_steps must be >= 1, got {max_steps}")
        return [(0,)]

    X = psi[:, 1:] - psi[:, 1:].mean(axis=0)
    norms = np.linalg.norm(X, axis=0)
    usable = np.flatnonzero(norms > config.SINGULAR_CUTOFF * max(1.0, norms.max(initial=0.0)))
    path = [(0,)]
    if usable.size == 0:
        return path

    X = X[:, usable] / norms[usable]
    yc = y - y.mean()
    steps = min(max_steps, usable.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        _, active, _ = sk_lars_path(X, yc, method="lar", max_iter=steps)

    entered = []
    for j in active[:steps]:
        entered.append(int(usable[j]) + 1)
        path.append((0,) + tuple(sorted(entered)))
    return path


def hybrid_lars_fit(psi: np.ndarray, y: np.ndarray) -> RegressionResult:
    """
    OLS refit and LOO score of every LARS prefix support; the support
    with the smallest LOO error wins, ties going to the smaller support.

    The winner must also beat the constant-only model by more than one
    standard error of its own LOO estimate, otherwise the constant is kept.
    """
    psi = np.asarray(psi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = psi.shape
    if n < 1 or p < 1:
        raise ValueError(f"regression matrix must be non-empty N x P, got shape {psi.shape}")

    # at most N-1 columns so the LOO error stays defined
    max_steps = min(p - 1, n - 2)
    path = lars_path(psi, y, max_steps) if max_steps >= 1 else [(0,)]

    fits = []
    for support in path:
        cols = list(support)
        coef = ols_fit(psi[:, cols], y)
        fits.append((support, coef) + _loo_terms(psi[:, cols], y, coef))

    best = fits[0]
    for fit in fits[1:]:
        if _improves(fit[2], best[2]):
            best = fit
    constant = fits[0]
    if best is not constant and constant[2] <= best[2] + best[3]:
        logger.debug("LOO gain over the constant model within one standard error; keeping the constant")
        best = constant

    best_support, best_coef, best_err, _ = best
    coefficients = np.zeros(p)
    coefficients[list(best_support)] = best_coef
    rank = np.linalg.matrix_rank(psi[:, list(best_support)], tol=None)
    return RegressionResult(
        coefficients=coefficients,
        support=best_support,
        loo_error=best_err,
        n_samples=n,
        rank_deficient=bool(rank < len(best_support)),
    )


# ============= DEGREE-ADAPTIVE PCE =============

def adaptive_fit(ed: ExperimentalDesign, rv: RandomVector,
                 cfg: Optional[AdaptiveConfig] = None) -> PceModel:
    """
    Sparse PCE with the degree chosen by LOO error over [p_min, p_max].
    Each degree is fitted independently; the scan stops after
    `early_stop_patience` consecutive degrees without improvement.
    """
    cfg = cfg or AdaptiveConfig()
    if ed.size < 3:
        raise ValueError(f"experimental design needs at least 3 points, got {ed.size}")

    U = to_standard(rv, ed.inputs).values
    y = ed.responses
    families = basis_families(rv)

    best: Optional[PceModel] = None
    stale = 0
    for degree in range(cfg.p_min, cfg.p_max + 1):
        scheme = TruncationScheme(max_degree=degree, q_norm=cfg.q_norm,
                                  max_interaction=cfg.max_interaction)
        basis = generate_basis(rv.dimension, scheme, families)
        fit = hybrid_lars_fit(design_matrix(basis, U), y)
        logger.debug("degree %d: %d/%d terms, LOO=%.3e", degree, len(fit.support), basis.size, fit.loo_error)

        if best is None or _improves(fit.loo_error, best.loo_error):
            best = PceModel(
                random_vector=rv, basis=basis, coefficients=fit.coefficients,
                support=fit.support, loo_error=fit.loo_error, degree=degree,
            )
            stale = 0
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                break

    return best


# ============= PREDICTION =============

def predict_standard(model: PceModel, U: np.ndarray) -> np.ndarray:
    """Surrogate values at standard-normal points"""
    return design_matrix(model.sparse_basis, U) @ model.sparse_coefficients


def predict(model: PceModel, X) -> np.ndarray:
    """Surrogate values at physical points"""
    values = X.values if isinstance(X, SampleMatrix) else np.asarray(X, dtype=float)
    if values.size == 0:
        return np.empty(0)
    return predict_standard(model, to_standard(model.random_vector, values).values)
