"""
Bootstrap PCE ensembles: pairs resampling of the experimental design,
replicate refits (fast or full mode), replicate predictions and
empirical quantile bands.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from modules.chaos_basis import design_matrix
from modules.config import config
from modules.errors import AbpceError
from modules.input_model import to_standard
from modules.models import (
    AdaptiveConfig, BootstrapEnsemble, BootstrapMode, ExperimentalDesign, PceModel, SampleMatrix,
)
from modules.regression import adaptive_fit, ols_fit

logger = logging.getLogger(__name__)


def resample_indices(n: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """B x N matrix of row indices drawn uniformly with replacement"""
    if n < 2:
        raise ValueError(f"bootstrap needs at least 2 design points, got {n}")
    if b < 2:
        raise ValueError(f"bootstrap needs at least 2 replicates, got {b}")
    return rng.integers(0, n, size=(b, n))


def _distinct_rows(inputs: np.ndarray, rows: np.ndarray) -> int:
    return np.unique(inputs[rows], axis=0).shape[0]


def _checked_rows(ed: ExperimentalDesign, rows: np.ndarray, rng: np.random.Generator,
                  replicate: int) -> np.ndarray:
    """Redraw a resample with fewer than 2 distinct points"""
    attempts = 0
    while _distinct_rows(ed.inputs, rows) < 2:
        if attempts >= config.MAX_REDRAWS:
            raise AbpceError(
                f"replicate {replicate}: resampled design has fewer than 2 distinct points "
                f"after {config.MAX_REDRAWS} redraws"
            )
        rows = rng.integers(0, ed.size, size=ed.size)
        attempts += 1
    return rows


def fit_ensemble(ed: ExperimentalDesign, full_fit: PceModel, mode: BootstrapMode,
                 b: int, rng: np.random.Generator,
                 adaptive_cfg: Optional[AdaptiveConfig] = None) -> BootstrapEnsemble:
    """
    B replicate PCEs on resampled designs (duplicates kept as repeated rows).

    Fast: the full fit's sparse basis is kept and only its coefficients are
    re-estimated by OLS. Full: a complete degree-adaptive sparse fit per replicate.
    """
    mode = BootstrapMode(mode)
    resampled = resample_indices(ed.size, b, rng)
    rv = full_fit.random_vector

    bases, coefficients = [], []
    if mode == BootstrapMode.FAST:
        basis = full_fit.sparse_basis
        psi = design_matrix(basis, to_standard(rv, ed.inputs).values)
        bases.append(basis)
        for k in range(b):
            rows = _checked_rows(ed, resampled[k], rng, k)
            resampled[k] = rows
            coefficients.append(ols_fit(psi[rows], ed.responses[rows]))
    else:
        for k in range(b):
            rows = _checked_rows(ed, resampled[k], rng, k)
            resampled[k] = rows
            replicate = adaptive_fit(ed.subset(rows), rv, adaptive_cfg)
            bases.append(replicate.sparse_basis)
            coefficients.append(replicate.sparse_coefficients)

    logger.debug("%s bootstrap: B=%d, N=%d", mode.value, b, ed.size)
    return BootstrapEnsemble(
        mode=mode,
        random_vector=rv,
        bases=tuple(bases),
        coefficients=tuple(np.asarray(c) for c in coefficients),
        resampled=resampled,
        n_source=ed.size,
    )


def ensemble_predict_standard(ens: BootstrapEnsemble, U: np.ndarray) -> np.ndarray:
    """B x n replicate predictions at standard-normal points"""
    U = np.asarray(U, dtype=float)
    if ens.mode == BootstrapMode.FAST:
        psi = design_matrix(ens.bases[0], U)
        return np.vstack(ens.coefficients) @ psi.T
    out = np.empty((ens.B, U.shape[0]))
    for k in range(ens.B):
        out[k] = design_matrix(ens.basis_of(k), U) @ ens.coefficients[k]
    return out


def ensemble_predict(ens: BootstrapEnsemble, X) -> np.ndarray:
    """B x n replicate predictions at physical points"""
    values = X.values if isinstance(X, SampleMatrix) else np.asarray(X, dtype=float)
    if values.size == 0:
        return np.empty((ens.B, 0))
    return ensemble_predict_standard(ens, to_standard(ens.random_vector, values).values)


def band_from_predictions(predictions: np.ndarray,
                          level: float = config.BAND_LEVEL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-column (1-level)/2 and (1+level)/2 empirical quantiles.
    Linear interpolation between order statistics: position q*(B-1).
    """
    if not 0 < level < 1:
        raise ValueError(f"band level must lie in (0, 1), got {level}")
    predictions = np.asarray(predictions, dtype=float)
    lower = np.quantile(predictions, (1 - level) / 2, axis=0, method="linear")
    upper = np.quantile(predictions, (1 + level) / 2, axis=0, method="linear")
    return lower, upper


def quantile_band(ens: BootstrapEnsemble, X,
                  level: float = config.BAND_LEVEL) -> Tuple[np.ndarray, np.ndarray]:
    """Empirical inter-quantile band of the replicate predictions at X"""
    if not 0 < level < 1:
        raise ValueError(f"band level must lie in (0, 1), got {level}")
    return band_from_predictions(ensemble_predict(ens, X), level)
