"""
Learning function and experimental-design enrichment.

Every candidate point gets the fraction-of-bootstrap-replicates score
U = |B_safe - B_fail| / B: 1 when all replicates agree on safe/failed,
0 when they split evenly. Enrichment picks the lowest scores, one point
or one per k-means cluster of the limit-state margin.
"""

import logging
from typing import List, Tuple

import numpy as np
from sklearn.cluster import KMeans

from modules.bootstrap import ensemble_predict_standard
from modules.config import config
from modules.errors import PoolExhaustedError
from modules.models import ArrayModel, BootstrapEnsemble, CandidatePool, ExperimentalDesign, LimitState, PceModel
from modules.regression import predict_standard
from modules.state import draw_seed

logger = logging.getLogger(__name__)


class PoolScan(ArrayModel):
    """Per-point and per-replicate statistics of one pass over the pool"""
    b_fail: np.ndarray            # replicates predicting failure, per point
    n_replicates: int
    replicate_failures: np.ndarray  # failed points, per replicate
    median_g: np.ndarray
    full_g: np.ndarray            # full-design surrogate g
    in_design: np.ndarray         # bool mask, point already evaluated

    @property
    def size(self) -> int:
        return self.b_fail.shape[0]

    @property
    def u(self) -> np.ndarray:
        return u_fbr_from_counts(self.b_fail, self.n_replicates)

    @property
    def replicate_pfs(self) -> np.ndarray:
        return self.replicate_failures / self.size

    @property
    def pf_hat(self) -> float:
        return float(np.count_nonzero(self.full_g <= 0)) / self.size


# ============= LEARNING FUNCTION =============

def u_fbr(b_safe: int, b_fail: int) -> float:
    """|B_safe - B_fail| / B in [0, 1]"""
    total = b_safe + b_fail
    if b_safe < 0 or b_fail < 0 or total == 0:
        raise ValueError(f"invalid replicate counts safe={b_safe}, fail={b_fail}")
    return abs(b_safe - b_fail) / total


def u_fbr_from_counts(b_fail: np.ndarray, b: int) -> np.ndarray:
    return np.abs(b - 2 * np.asarray(b_fail)) / b


def design_mask(points: np.ndarray, design_inputs: np.ndarray) -> np.ndarray:
    """True where a point coincides exactly with an experimental-design row"""
    points = np.ascontiguousarray(points, dtype=float)
    seen = {np.ascontiguousarray(row, dtype=float).tobytes() for row in design_inputs}
    if not seen:
        return np.zeros(points.shape[0], dtype=bool)
    return np.fromiter((row.tobytes() in seen for row in points), dtype=bool, count=points.shape[0])


def scan_pool(surrogate: PceModel, ens: BootstrapEnsemble, pool: CandidatePool,
              limit_state: LimitState, ed: ExperimentalDesign,
              chunk: int = config.POOL_CHUNK) -> PoolScan:
    """Evaluate the full fit and every replicate on the pool, chunk by chunk"""
    n = pool.size
    b_fail = np.empty(n, dtype=np.int64)
    median_g = np.empty(n)
    full_g = np.empty(n)
    replicate_failures = np.zeros(ens.B, dtype=np.int64)

    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        U = pool.standard[start:stop]
        g_rep = limit_state.to_g(ensemble_predict_standard(ens, U))
        failed = g_rep <= 0
        b_fail[start:stop] = failed.sum(axis=0)
        replicate_failures += failed.sum(axis=1)
        median_g[start:stop] = np.median(g_rep, axis=0)
        full_g[start:stop] = limit_state.to_g(predict_standard(surrogate, U))

    return PoolScan(
        b_fail=b_fail,
        n_replicates=ens.B,
        replicate_failures=replicate_failures,
        median_g=median_g,
        full_g=full_g,
        in_design=design_mask(pool.physical, ed.inputs),
    )


def margin_set(scan: PoolScan) -> np.ndarray:
    """Pool indices with U < 1 that are not already in the design"""
    return np.flatnonzero((scan.u < 1) & ~scan.in_design)


# ============= ENRICHMENT =============

def _fallback(scan: PoolScan) -> int:
    """Point closest to the median limit-state surface"""
    candidates = np.flatnonzero(~scan.in_design)
    if candidates.size == 0:
        raise PoolExhaustedError(f"all {scan.size} candidate points are already in the design")
    return int(candidates[np.argmin(np.abs(scan.median_g[candidates]))])


def enrich_single(scan: PoolScan) -> int:
    """
    Margin point with the smallest U, lowest pool index on ties.
    With an empty margin, the non-design point minimizing |median g|.
    """
    margin = margin_set(scan)
    if margin.size == 0:
        index = _fallback(scan)
        logger.debug("Empty margin, fallback point %d", index)
        return index
    return int(margin[np.argmin(scan.u[margin])])


def kmeans(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int = config.KMEANS_MAX_ITER) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lloyd k-means with k-means++ seeding. K shrinks to the number of
    distinct points; empty clusters are relocated to far-away points.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[0] < 1:
        raise ValueError("k-means needs at least one point")
    if k < 1:
        raise ValueError(f"number of clusters must be >= 1, got {k}")
    k = min(k, np.unique(points, axis=0).shape[0])
    model = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=max_iter,
                   random_state=draw_seed(rng))
    labels = model.fit_predict(points)
    return labels, model.cluster_centers_


def enrich_multi(scan: PoolScan, pool: CandidatePool, k: int, rng: np.random.Generator,
                 max_iter: int = config.KMEANS_MAX_ITER) -> List[int]:
    """
    Up to K points: the margin is clustered in standard-normal space and
    each cluster contributes its smallest-U point.
    """
    margin = margin_set(scan)
    if margin.size == 0:
        return [enrich_single(scan)]

    labels, _ = kmeans(pool.standard[margin], k, rng, max_iter)
    u = scan.u
    selected = []
    for label in np.unique(labels):
        members = margin[labels == label]
        selected.append(int(members[np.argmin(u[members])]))
    logger.debug("Margin of %d points, %d clusters", margin.size, len(selected))
    return sorted(selected)
