"""
Reliability engine: failure-probability estimators, bootstrap bounds,
convergence rule and the active bootstrap-PCE loop.
Pure functions over immutable inputs - no file or console I/O.
"""

import logging
import time
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import ndtri

from modules.bootstrap import fit_ensemble
from modules.config import config
from modules.enrichment import PoolScan, enrich_multi, enrich_single, scan_pool
from modules.errors import ModelEvaluationError, PoolExhaustedError
from modules.input_model import from_standard, sample_lhs, sample_standard, sample_uniform_ball
from modules.models import (
    AbpceResult, AdaptiveConfig, CandidatePool, ConvergenceConfig, DesignType, EnrichmentConfig,
    ExperimentalDesign, InitialDesignSpec, IterationRecord, LimitState, PceModel, RandomVector,
)
from modules.regression import adaptive_fit
from modules.state import (
    STREAM_BOOTSTRAP, STREAM_INITIAL_DESIGN, STREAM_KMEANS, STREAM_POOL, STREAM_POOL_GROWTH, substream,
)

logger = logging.getLogger(__name__)


# ============= ESTIMATORS =============

def mcs_pf(g_values) -> float:
    """Fraction of points with g <= 0 (the failure domain is closed)"""
    g = np.asarray(g_values, dtype=float).ravel()
    if g.size == 0:
        raise ValueError("cannot estimate a failure probability from an empty sample")
    return float(np.count_nonzero(g <= 0)) / g.size


def replicate_pfs(scan: PoolScan) -> np.ndarray:
    """P_F estimate of each bootstrap replicate on the pool"""
    return scan.replicate_pfs


def pf_bounds(pfs) -> Tuple[float, float]:
    """(min, max) of the replicate estimates"""
    pfs = np.asarray(pfs, dtype=float)
    if pfs.size == 0:
        raise ValueError("no replicate estimates to bound")
    return float(pfs.min()), float(pfs.max())


def pf_quantile_bounds(pfs, level: float = config.BAND_LEVEL) -> Tuple[float, float]:
    """Empirical (1-level)/2 and (1+level)/2 quantiles of the replicate estimates"""
    pfs = np.asarray(pfs, dtype=float)
    if pfs.size == 0:
        raise ValueError("no replicate estimates to bound")
    lower, upper = np.quantile(pfs, [(1 - level) / 2, (1 + level) / 2], method="linear")
    return float(lower), float(upper)


def convergence_criterion(pf_hat: float, pf_minus: float, pf_plus: float) -> float:
    """(pf+ - pf-) / pf_hat; inf when pf_hat is zero"""
    if pf_hat <= 0:
        return float("inf")
    return (pf_plus - pf_minus) / pf_hat


def beta_index(pf: float) -> float:
    """Generalized reliability index -Phi^-1(pf)"""
    if not 0 <= pf <= 1:
        raise ValueError(f"failure probability must lie in [0, 1], got {pf}")
    return float(-ndtri(pf))


# ============= MODEL EVALUATION =============

def evaluate_model(limit_state: LimitState, X: np.ndarray) -> np.ndarray:
    """Run the true model on a batch; failures carry the offending points"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    try:
        responses = np.asarray(limit_state.model(X), dtype=float).ravel()
    except ModelEvaluationError:
        raise
    except Exception as e:
        raise ModelEvaluationError(f"model evaluation failed: {e}", points=X) from e

    if responses.shape[0] != X.shape[0]:
        raise ModelEvaluationError(
            f"model returned {responses.shape[0]} responses for {X.shape[0]} points", points=X
        )
    bad = ~np.isfinite(responses)
    if np.any(bad):
        raise ModelEvaluationError(
            f"model returned non-finite responses at {int(bad.sum())} point(s)", points=X[bad]
        )
    return responses


# ============= DESIGN AND POOL =============

def initial_design(rv: RandomVector, spec: InitialDesignSpec, rng: np.random.Generator) -> np.ndarray:
    """Initial experimental design inputs (physical space)"""
    n = spec.size or config.initial_design_size(rv.dimension)
    if spec.design == DesignType.BALL:
        return sample_uniform_ball(rv, n, spec.radius, rng).values
    return sample_lhs(rv, n, rng, centered=spec.centered).values


def draw_pool(rv: RandomVector, n: int, rng: np.random.Generator) -> CandidatePool:
    """MCS candidate pool with its standard-normal copy"""
    U = sample_standard(rv, n, rng)
    X = from_standard(rv, U).values
    U.flags.writeable = False
    X.flags.writeable = False
    return CandidatePool(physical=X, standard=U)


def extend_pool(pool: CandidatePool, rv: RandomVector, n: int, rng: np.random.Generator) -> CandidatePool:
    """Pool with n fresh points appended; the original rows are unchanged"""
    extra = draw_pool(rv, n, rng)
    return CandidatePool(
        physical=np.vstack([pool.physical, extra.physical]),
        standard=np.vstack([pool.standard, extra.standard]),
    )


# ============= ACTIVE LOOP =============

def _record(iteration: int, n_total: int, surrogate: PceModel, scan: PoolScan,
            criterion: float) -> IterationRecord:
    pfs = scan.replicate_pfs
    pf_hat = scan.pf_hat
    pf_minus, pf_plus = pf_bounds(pfs)
    q_lower, q_upper = pf_quantile_bounds(pfs)
    return IterationRecord(
        iteration=iteration,
        n_total=n_total,
        pf_hat=pf_hat,
        pf_minus=pf_minus,
        pf_plus=pf_plus,
        pf_q_lower=q_lower,
        pf_q_upper=q_upper,
        beta=beta_index(pf_hat),
        beta_minus=beta_index(pf_plus),
        beta_plus=beta_index(pf_minus),
        criterion=criterion,
        cov_mcs=config.mcs_cov(pf_hat, scan.size),
        n_mcs=scan.size,
        degree=surrogate.degree,
        n_terms=len(surrogate.support),
        loo_error=surrogate.loo_error,
        n_margin=int(np.count_nonzero((scan.u < 1) & ~scan.in_design)),
    )


def run_abpce(
    rv: RandomVector,
    limit_state: LimitState,
    design_spec: Optional[InitialDesignSpec] = None,
    enrichment_cfg: Optional[EnrichmentConfig] = None,
    convergence_cfg: Optional[ConvergenceConfig] = None,
    adaptive_cfg: Optional[AdaptiveConfig] = None,
    seed: int = 0,
    on_iteration: Optional[Callable[[IterationRecord], None]] = None,
) -> AbpceResult:
    """
    Active bootstrap-PCE reliability analysis.

    Fits a sparse PCE and its bootstrap ensemble on the current design,
    estimates P_F and its replicate bounds on a fixed MCS pool, and adds
    the K most ambiguous pool points until (pf+ - pf-)/pf_hat <= epsilon
    holds on `required_consecutive` consecutive iterations or the budget
    N_max is spent.

    Args:
        seed: master seed; every random draw comes from a substream of it
        on_iteration: called with each IterationRecord as soon as it exists

    Returns:
        AbpceResult with pf_hat from the full-design PCE and min/max bounds
        over the replicates
    """
    design_spec = design_spec or InitialDesignSpec()
    enrichment_cfg = enrichment_cfg or EnrichmentConfig()
    convergence_cfg = convergence_cfg or ConvergenceConfig()
    adaptive_cfg = adaptive_cfg or AdaptiveConfig()

    n_ini = design_spec.size or config.initial_design_size(rv.dimension)
    if convergence_cfg.n_max < n_ini:
        raise ValueError(f"budget N_max={convergence_cfg.n_max} is below the initial design size {n_ini}")

    started = time.perf_counter()
    X0 = initial_design(rv, design_spec, substream(seed, STREAM_INITIAL_DESIGN))
    ed = ExperimentalDesign(inputs=X0, responses=evaluate_model(limit_state, X0))
    pool = draw_pool(rv, convergence_cfg.n_mcs, substream(seed, STREAM_POOL))
    growth_rng = substream(seed, STREAM_POOL_GROWTH)
    logger.info("Active run start: M=%d, N_ini=%d, N_MCS=%d, B=%d, K=%d, eps=%.3f",
                rv.dimension, ed.size, pool.size, convergence_cfg.n_bootstrap,
                enrichment_cfg.k, convergence_cfg.epsilon_pf)

    history: List[IterationRecord] = []
    diagnostics: List[str] = []
    streak = 0
    converged = False
    zero_iterations = 0
    iteration = 0

    while True:
        surrogate = adaptive_fit(ed, rv, adaptive_cfg)
        ensemble = fit_ensemble(ed, surrogate, convergence_cfg.mode, convergence_cfg.n_bootstrap,
                                substream(seed, STREAM_BOOTSTRAP, iteration), adaptive_cfg)
        scan = scan_pool(surrogate, ensemble, pool, limit_state, ed)

        if convergence_cfg.target_cov is not None:
            while (config.mcs_cov(scan.pf_hat, pool.size) > convergence_cfg.target_cov
                   and pool.size < convergence_cfg.n_mcs_max):
                grow = min(convergence_cfg.n_mcs_batch, convergence_cfg.n_mcs_max - pool.size)
                pool = extend_pool(pool, rv, grow, growth_rng)
                scan = scan_pool(surrogate, ensemble, pool, limit_state, ed)
                logger.info("Pool grown to %d points (CoV %.3f)", pool.size,
                            config.mcs_cov(scan.pf_hat, pool.size))

        pf_minus, pf_plus = pf_bounds(scan.replicate_pfs)
        criterion = convergence_criterion(scan.pf_hat, pf_minus, pf_plus)
        streak = streak + 1 if criterion <= convergence_cfg.epsilon_pf else 0
        converged = streak >= convergence_cfg.required_consecutive
        if scan.pf_hat == 0:
            zero_iterations += 1

        record = _record(iteration, ed.size, surrogate, scan, criterion)
        logger.info("iter %d: N=%d pf=%.4e [%.4e, %.4e] crit=%.4f p=%d terms=%d",
                    iteration, ed.size, record.pf_hat, pf_minus, pf_plus, criterion,
                    surrogate.degree, record.n_terms)

        remaining = convergence_cfg.n_max - ed.size
        new_points = None
        if not converged and remaining > 0:
            k = min(enrichment_cfg.k, remaining)
            try:
                if k == 1:
                    selected = [enrich_single(scan)]
                else:
                    selected = enrich_multi(scan, pool, k, substream(seed, STREAM_KMEANS, iteration),
                                            enrichment_cfg.kmeans_max_iter)
            except PoolExhaustedError as e:
                diagnostics.append(str(e))
                selected = []
            if selected:
                new_points = pool.physical[selected]
                record = record.model_copy(update={"selected": new_points.tolist()})

        history.append(record)
        if on_iteration is not None:
            on_iteration(record)

        if converged or new_points is None:
            break
        ed = ed.append(new_points, evaluate_model(limit_state, new_points))
        iteration += 1

    final = history[-1]
    if final.pf_hat == 0:
        diagnostics.append(
            f"surrogate predicts no failure among {final.n_mcs} pool points in "
            f"{zero_iterations} of {len(history)} iterations; the pool may be too small "
            f"for this failure probability"
        )
    if not converged:
        logger.warning("Budget exhausted after %d evaluations without convergence", ed.size)

    logger.info("Active run done in %.1fs: pf=%.4e, beta=%.3f, N_total=%d, converged=%s",
                time.perf_counter() - started, final.pf_hat, final.beta, ed.size, converged)

    return AbpceResult(
        pf_hat=final.pf_hat,
        pf_minus=final.pf_minus,
        pf_plus=final.pf_plus,
        beta=final.beta,
        beta_minus=final.beta_minus,
        beta_plus=final.beta_plus,
        n_total=ed.size,
        converged=converged,
        history=history,
        replicate_pfs=scan.replicate_pfs.tolist(),
        diagnostics=diagnostics,
        design=ed,
        surrogate=surrogate,
        pool=pool,
    )
