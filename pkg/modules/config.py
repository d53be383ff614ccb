"""
Algorithm defaults: bootstrap size, pool size, degree range, convergence
thresholds and the canned benchmark settings
"""
from typing import Dict, Any


class AbpceConfig:
    """Algorithm defaults for active bootstrap-PCE reliability analysis"""

    # Bootstrap
    N_BOOTSTRAP: int = 100          # B replicates
    MIN_BOOTSTRAP: int = 20         # hard floor on B
    MAX_REDRAWS: int = 10           # resampled designs with < 2 distinct rows
    BAND_LEVEL: float = 0.95        # empirical inter-quantile band

    # Candidate pool (inner MCS)
    N_MCS: int = 1_000_000
    MIN_N_MCS: int = 1_000
    N_MCS_BATCH: int = 100_000      # growth step when a target CoV is set
    N_MCS_MAX: int = 10_000_000
    POOL_CHUNK: int = 50_000        # rows per surrogate scan chunk

    # Initial design
    MIN_INITIAL_SIZE: int = 12      # N_ini = max(12, 2M)
    BALL_RADIUS: float = 5.0        # covers beta up to ~5

    # Sparse PCE
    P_MIN: int = 1
    P_MAX: int = 10
    MAX_DEGREE: int = 20
    Q_NORM: float = 1.0
    EARLY_STOP_PATIENCE: int = 2
    SINGULAR_CUTOFF: float = 1e-12  # relative singular value cutoff
    LEVERAGE_TOL: float = 1e-10     # h_i this close to 1 counts as interpolating
    LOO_FLOOR: float = 1e-14        # LOO errors below this are numerically zero

    # Enrichment and convergence
    K: int = 1
    KMEANS_MAX_ITER: int = 100
    EPSILON_PF: float = 0.05
    REQUIRED_CONSECUTIVE: int = 2
    N_MAX: int = 1000

    # Typical criterion range; outside it validation warns
    EPSILON_TYPICAL_MIN: float = 0.05
    EPSILON_TYPICAL_MAX: float = 0.15

    # Artifacts
    FLOAT_FORMAT: str = "%.17g"

    def __init__(self):
        # Canned settings for the built-in reproductions
        self.BENCHMARK_SETTINGS: Dict[str, Dict[str, Any]] = {
            'four_branch': {'n_ini': 20, 'design': 'lhs', 'k': 3, 'epsilon_pf': 0.05,
                            'p_min': 2, 'p_max': 10},
            'truss': {'n_ini': 30, 'design': 'ball', 'k': 3, 'epsilon_pf': 0.10,
                      'p_min': 1, 'p_max': 10, 'q_norm': 0.75, 'max_interaction': 2},
            'linear_oracle': {'k': 1, 'epsilon_pf': 0.05},
            'sinc_1d': {'n_ini': 8, 'design': 'lhs', 'p_min': 1, 'p_max': 10},
        }

    def initial_design_size(self, dimension: int) -> int:
        """Default initial design size for an M-dimensional input"""
        return max(self.MIN_INITIAL_SIZE, 2 * dimension)

    def mcs_cov(self, pf: float, n: int) -> float:
        """Coefficient of variation of a crude MCS estimate"""
        if pf <= 0 or n <= 0:
            return float('inf')
        return ((1 - pf) / (n * pf)) ** 0.5


# Singleton instance
config = AbpceConfig()
