"""
Domain models for active bootstrap-PCE reliability analysis.
Arrays held by these models are read-only once validated.
"""

from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy import linalg

from modules.config import config


def _frozen_array(value: Any, dtype=float) -> np.ndarray:
    """Copy into a read-only numpy array"""
    arr = np.array(value, dtype=dtype)
    arr.flags.writeable = False
    return arr


class ArrayModel(BaseModel):
    """Immutable model that may carry numpy arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ============= ENUMS =============

class Family(str, Enum):
    """Marginal distribution families"""
    GAUSSIAN = "gaussian"
    LOGNORMAL = "lognormal"
    GUMBEL = "gumbel"
    UNIFORM = "uniform"
    TRUNCATED_GAUSSIAN = "truncated_gaussian"


class SpaceTag(str, Enum):
    """Coordinate space of a sample matrix"""
    PHYSICAL = "physical"
    STANDARD = "standard"


class PolynomialFamily(str, Enum):
    """Univariate orthonormal polynomial family"""
    HERMITE = "hermite"
    LEGENDRE = "legendre"


class BootstrapMode(str, Enum):
    """Fast: shared sparse basis. Full: sparse refit per replicate"""
    FAST = "fast"
    FULL = "full"


class DesignType(str, Enum):
    """Initial experimental design generator"""
    LHS = "lhs"
    BALL = "ball"


class Comparison(str, Enum):
    """How a model response maps to the limit-state value g"""
    IDENTITY = "identity"      # g = response
    THRESHOLD = "threshold"    # g = threshold - response


# ============= INPUT MODEL =============

_REQUIRED_PARAMS = {
    Family.GAUSSIAN: ("mu", "sigma"),
    Family.LOGNORMAL: ("lambda", "zeta"),
    Family.GUMBEL: ("loc", "scale"),
    Family.UNIFORM: ("lower", "upper"),
    Family.TRUNCATED_GAUSSIAN: ("mu", "sigma", "lower", "upper"),
}

_SCALE_PARAMS = {
    Family.GAUSSIAN: "sigma",
    Family.LOGNORMAL: "zeta",
    Family.GUMBEL: "scale",
    Family.TRUNCATED_GAUSSIAN: "sigma",
}


class MarginalDistribution(BaseModel):
    """
    One marginal of the input vector.
    TruncatedGaussian keeps the untruncated mu/sigma plus its bounds.
    """
    model_config = ConfigDict(frozen=True)

    family: Family
    params: Dict[str, float]
    name: str = ""
    unit: str = ""

    @model_validator(mode="after")
    def check_params(self):
        required = _REQUIRED_PARAMS[self.family]
        missing = [key for key in required if key not in self.params]
        if missing:
            raise ValueError(f"{self.family.value} marginal needs parameters {missing}")
        extra = sorted(set(self.params) - set(required))
        if extra:
            raise ValueError(f"{self.family.value} marginal does not take parameters {extra}")
        scale = _SCALE_PARAMS.get(self.family)
        if scale and not self.params[scale] > 0:
            raise ValueError(f"{scale} must be > 0, got {self.params[scale]}")
        if "lower" in required and not self.params["lower"] < self.params["upper"]:
            raise ValueError(
                f"lower bound {self.params['lower']} must be below upper bound {self.params['upper']}"
            )
        return self


class RandomVector(ArrayModel):
    """
    Marginals coupled by a Gaussian copula.
    copula_correlation defaults to the identity (independent inputs).
    """
    marginals: Tuple[MarginalDistribution, ...]
    copula_correlation: Optional[np.ndarray] = None

    _correlation: np.ndarray = PrivateAttr()
    _cholesky: np.ndarray = PrivateAttr()

    @field_validator("copula_correlation", mode="before")
    @classmethod
    def as_array(cls, v):
        return None if v is None else _frozen_array(v)

    @model_validator(mode="after")
    def check_copula(self):
        m = len(self.marginals)
        if m < 1:
            raise ValueError("a random vector needs at least one marginal")
        R = np.eye(m) if self.copula_correlation is None else self.copula_correlation
        if R.shape != (m, m):
            raise ValueError(f"copula correlation matrix must be {m}x{m}, got {R.shape}")
        if not np.allclose(R, R.T, rtol=0, atol=1e-12):
            raise ValueError("copula correlation matrix must be symmetric")
        if not np.allclose(np.diag(R), 1.0, rtol=0, atol=1e-12):
            raise ValueError("copula correlation matrix must have a unit diagonal")
        try:
            L = linalg.cholesky(R, lower=True)
        except linalg.LinAlgError:
            raise ValueError("copula correlation matrix is not positive-definite")
        self._correlation = _frozen_array(R)
        self._cholesky = _frozen_array(L)
        return self

    @property
    def dimension(self) -> int:
        return len(self.marginals)

    @property
    def correlation(self) -> np.ndarray:
        return self._correlation

    @property
    def cholesky_factor(self) -> np.ndarray:
        """Lower-triangular L with L @ L.T == R"""
        return self._cholesky

    @property
    def is_independent(self) -> bool:
        return bool(np.array_equal(self._correlation, np.eye(self.dimension)))

    @property
    def names(self) -> List[str]:
        return [m.name or f"x{i + 1}" for i, m in enumerate(self.marginals)]


class SampleMatrix(ArrayModel):
    """N x M block of input points tagged with its coordinate space"""
    values: np.ndarray
    space: SpaceTag = SpaceTag.PHYSICAL

    @field_validator("values", mode="before")
    @classmethod
    def as_matrix(cls, v):
        arr = np.array(v, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"sample matrix must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample matrix entries must be finite")
        return _frozen_array(arr)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]


class ExperimentalDesign(ArrayModel):
    """Input points (physical space) paired with model responses"""
    inputs: np.ndarray
    responses: np.ndarray

    @field_validator("inputs", mode="before")
    @classmethod
    def inputs_matrix(cls, v):
        arr = np.array(v, dtype=float)
        return _frozen_array(arr.reshape(-1, 1) if arr.ndim == 1 else arr)

    @field_validator("responses", mode="before")
    @classmethod
    def responses_vector(cls, v):
        return _frozen_array(np.ravel(v))

    @model_validator(mode="after")
    def check_pairing(self):
        if self.inputs.shape[0] != self.responses.shape[0]:
            raise ValueError(
                f"{self.inputs.shape[0]} input rows but {self.responses.shape[0]} responses"
            )
        if not np.all(np.isfinite(self.responses)):
            raise ValueError("model responses must be finite")
        return self

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    def append(self, inputs: np.ndarray, responses: np.ndarray) -> "ExperimentalDesign":
        """Return a new design with extra rows"""
        inputs = np.asarray(inputs, dtype=float).reshape(-1, self.inputs.shape[1])
        return ExperimentalDesign(
            inputs=np.vstack([self.inputs, inputs]),
            responses=np.concatenate([self.responses, np.ravel(responses)]),
        )

    def subset(self, rows: np.ndarray) -> "ExperimentalDesign":
        """Rows by index, duplicates kept"""
        return ExperimentalDesign(inputs=self.inputs[rows], responses=self.responses[rows])


# ============= POLYNOMIAL CHAOS =============

# A multi-index is one row of BasisSet.indices: length-M non-negative integers.
class TruncationScheme(BaseModel):
    """Total degree p, hyperbolic q-norm and maximum interaction rank r"""
    model_config = ConfigDict(frozen=True)

    max_degree: int = Field(ge=0, le=config.MAX_DEGREE)
    q_norm: float = Field(default=1.0, gt=0, le=1)
    max_interaction: Optional[int] = Field(default=None, ge=1)


class BasisSet(ArrayModel):
    """Ordered multi-indices (P x M) with the polynomial family of each input"""
    indices: np.ndarray
    scheme: TruncationScheme
    families: Tuple[PolynomialFamily, ...]

    @field_validator("indices", mode="before")
    @classmethod
    def as_int_matrix(cls, v):
        return _frozen_array(v, dtype=np.int64)

    @model_validator(mode="after")
    def check_shape(self):
        if self.indices.ndim != 2 or self.indices.shape[1] != len(self.families):
            raise ValueError("basis indices must be P x M with one family per input")
        return self

    @property
    def dimension(self) -> int:
        return self.indices.shape[1]

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def subset(self, support) -> "BasisSet":
        return BasisSet(indices=self.indices[list(support)], scheme=self.scheme, families=self.families)


class RegressionResult(ArrayModel):
    """Hybrid-LARS fit: full-length coefficients, zero off the support"""
    coefficients: np.ndarray
    support: Tuple[int, ...]
    loo_error: float = Field(ge=0)
    n_samples: int
    rank_deficient: bool = False

    @field_validator("coefficients", mode="before")
    @classmethod
    def as_vector(cls, v):
        return _frozen_array(np.ravel(v))


class AdaptiveConfig(BaseModel):
    """Degree-adaptive sparse PCE settings"""
    model_config = ConfigDict(frozen=True)

    p_min: int = Field(default=config.P_MIN, ge=1, le=config.MAX_DEGREE)
    p_max: int = Field(default=config.P_MAX, ge=1, le=config.MAX_DEGREE)
    q_norm: float = Field(default=config.Q_NORM, gt=0, le=1)
    max_interaction: Optional[int] = Field(default=None, ge=1)
    early_stop_patience: int = Field(default=config.EARLY_STOP_PATIENCE, ge=1)

    @model_validator(mode="after")
    def check_range(self):
        if self.p_min > self.p_max:
            raise ValueError(f"p_min={self.p_min} exceeds p_max={self.p_max}")
        return self


class PceModel(ArrayModel):
    """Sparse PCE surrogate living in standard-normal space"""
    random_vector: RandomVector
    basis: BasisSet
    coefficients: np.ndarray
    support: Tuple[int, ...]
    loo_error: float
    degree: int

    @field_validator("coefficients", mode="before")
    @classmethod
    def as_vector(cls, v):
        return _frozen_array(np.ravel(v))

    @property
    def sparse_basis(self) -> BasisSet:
        return self.basis.subset(self.support)

    @property
    def sparse_coefficients(self) -> np.ndarray:
        return self.coefficients[list(self.support)]

    @property
    def mean(self) -> float:
        """Coefficient of the constant term"""
        return float(self.coefficients[0])


class BootstrapEnsemble(ArrayModel):
    """
    B replicate coefficient vectors.
    Fast mode: one shared sparse basis. Full mode: one basis per replicate.
    """
    mode: BootstrapMode
    random_vector: RandomVector
    bases: Tuple[BasisSet, ...]
    coefficients: Tuple[np.ndarray, ...]
    resampled: np.ndarray
    n_source: int

    @model_validator(mode="after")
    def check_replicates(self):
        if len(self.coefficients) < 2:
            raise ValueError("an ensemble needs at least 2 replicates")
        expected = 1 if self.mode == BootstrapMode.FAST else len(self.coefficients)
        if len(self.bases) != expected:
            raise ValueError(f"{self.mode.value} ensemble needs {expected} bases, got {len(self.bases)}")
        return self

    @property
    def B(self) -> int:
        return len(self.coefficients)

    def basis_of(self, b: int) -> BasisSet:
        return self.bases[0] if self.mode == BootstrapMode.FAST else self.bases[b]


# ============= ACTIVE RELIABILITY =============

class LimitState(ArrayModel):
    """
    Vectorised model (N x M physical points -> N responses) plus the rule
    turning responses into g. Failure is g <= 0.
    """
    model: Callable[[np.ndarray], np.ndarray]
    comparison: Comparison = Comparison.IDENTITY
    threshold: Optional[float] = None
    name: str = ""

    @model_validator(mode="after")
    def check_threshold(self):
        if self.comparison == Comparison.THRESHOLD and self.threshold is None:
            raise ValueError("threshold comparison needs a threshold value")
        return self

    def to_g(self, responses: np.ndarray) -> np.ndarray:
        if self.comparison == Comparison.THRESHOLD:
            return self.threshold - np.asarray(responses)
        return np.asarray(responses)


class CandidatePool(ArrayModel):
    """Fixed MCS candidate sample, physical and standard-normal copies"""
    physical: np.ndarray
    standard: np.ndarray

    @property
    def size(self) -> int:
        return self.physical.shape[0]


class InitialDesignSpec(BaseModel):
    """Initial experimental design; size None means max(12, 2M)"""
    model_config = ConfigDict(frozen=True)

    design: DesignType = DesignType.LHS
    size: Optional[int] = Field(default=None, ge=3)
    radius: float = Field(default=config.BALL_RADIUS, gt=0)
    centered: bool = False


class EnrichmentConfig(BaseModel):
    """Points added per iteration and k-means settings"""
    model_config = ConfigDict(frozen=True)

    k: int = Field(default=config.K, ge=1)
    kmeans_max_iter: int = Field(default=config.KMEANS_MAX_ITER, ge=1)


class ConvergenceConfig(BaseModel):
    """Stopping rule, budget, bootstrap and pool sizes"""
    model_config = ConfigDict(frozen=True)

    epsilon_pf: float = Field(default=config.EPSILON_PF, gt=0, lt=1)
    required_consecutive: int = Field(default=config.REQUIRED_CONSECUTIVE, ge=1)
    n_max: int = Field(default=config.N_MAX, ge=1)
    n_bootstrap: int = Field(default=config.N_BOOTSTRAP, ge=2)
    n_mcs: int = Field(default=config.N_MCS, ge=1)
    mode: BootstrapMode = BootstrapMode.FAST
    target_cov: Optional[float] = Field(default=None, gt=0)
    n_mcs_batch: int = Field(default=config.N_MCS_BATCH, ge=1)
    n_mcs_max: int = Field(default=config.N_MCS_MAX, ge=1)


class IterationRecord(BaseModel):
    """State of the loop after one surrogate update"""
    iteration: int
    n_total: int
    pf_hat: float
    pf_minus: float
    pf_plus: float
    pf_q_lower: float
    pf_q_upper: float
    beta: float
    beta_minus: float
    beta_plus: float
    criterion: float
    cov_mcs: float
    n_mcs: int
    degree: int
    n_terms: int
    loo_error: float
    n_margin: int
    selected: List[List[float]] = Field(default_factory=list)


class AbpceResult(ArrayModel):
    """Final estimate, bounds and the full iteration history"""
    pf_hat: float
    pf_minus: float
    pf_plus: float
    beta: float
    beta_minus: float
    beta_plus: float
    n_total: int
    converged: bool
    history: List[IterationRecord]
    replicate_pfs: List[float]
    diagnostics: List[str] = Field(default_factory=list)
    design: Optional[ExperimentalDesign] = Field(default=None, exclude=True)
    surrogate: Optional[PceModel] = Field(default=None, exclude=True)
    pool: Optional[CandidatePool] = Field(default=None, exclude=True)

    @property
    def n_iterations(self) -> int:
        return len(self.history)


# ============= BENCHMARKS AND RUN CONFIGURATION =============

class MarginalSpec(BaseModel):
    """Marginal as written in a config file: moments or direct parameters"""
    model_config = ConfigDict(extra="forbid")

    family: Family
    name: str = ""
    unit: str = ""
    mean: Optional[float] = None
    std: Optional[float] = None
    params: Optional[Dict[str, float]] = None

    @model_validator(mode="after")
    def moments_or_params(self):
        has_moments = self.mean is not None or self.std is not None
        if has_moments == (self.params is not None):
            raise ValueError("give either mean/std or params, not both")
        if has_moments and (self.mean is None or self.std is None):
            raise ValueError("moment specification needs both mean and std")
        return self


class InputModelSpec(BaseModel):
    """Built-in input model name, or explicit marginals plus copula"""
    model_config = ConfigDict(extra="forbid")

    builtin: Optional[str] = None
    marginals: Optional[List[MarginalSpec]] = None
    copula: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def builtin_or_marginals(self):
        if (self.builtin is None) == (self.marginals is None):
            raise ValueError("give either a builtin input model or a list of marginals")
        if self.builtin is not None and self.copula is not None:
            raise ValueError("a builtin input model carries its own copula")
        return self


class LimitStateSpec(BaseModel):
    """Built-in limit state by name, or an external command"""
    model_config = ConfigDict(extra="forbid")

    builtin: Optional[str] = None
    command: Optional[str] = None
    workdir: Optional[str] = None
    threshold: Optional[float] = None
    parallel: bool = False

    @model_validator(mode="after")
    def builtin_or_command(self):
        if (self.builtin is None) == (self.command is None):
            raise ValueError("give either a builtin limit state or an external command")
        return self


class AlgorithmSection(BaseModel):
    """Algorithm settings of a run configuration"""
    model_config = ConfigDict(extra="forbid")

    n_ini: Optional[int] = Field(default=None, ge=3)
    design: DesignType = DesignType.LHS
    ball_radius: float = Field(default=config.BALL_RADIUS, gt=0)
    centered_lhs: bool = False
    n_bootstrap: int = config.N_BOOTSTRAP
    mode: BootstrapMode = BootstrapMode.FAST
    k: int = Field(default=config.K, ge=1)
    epsilon_pf: float = Field(default=config.EPSILON_PF, gt=0, lt=1)
    n_mcs: int = Field(default=config.N_MCS, ge=config.MIN_N_MCS)
    p_min: int = Field(default=config.P_MIN, ge=1, le=config.MAX_DEGREE)
    p_max: int = Field(default=config.P_MAX, ge=1, le=config.MAX_DEGREE)
    q_norm: float = Field(default=config.Q_NORM, gt=0, le=1)
    max_interaction: Optional[int] = Field(default=None, ge=1)
    early_stop_patience: int = Field(default=config.EARLY_STOP_PATIENCE, ge=1)
    n_max: int = Field(default=config.N_MAX, ge=1)
    consecutive: int = Field(default=config.REQUIRED_CONSECUTIVE, ge=1)
    target_cov: Optional[float] = Field(default=None, gt=0, lt=1)
    n_mcs_batch: int = Field(default=config.N_MCS_BATCH, ge=1)
    n_mcs_max: int = Field(default=config.N_MCS_MAX, ge=1)

    @field_validator("n_bootstrap")
    @classmethod
    def bootstrap_floor(cls, v):
        if v < config.MIN_BOOTSTRAP:
            raise ValueError(
                f"n_bootstrap={v} is below the floor B >= {config.MIN_BOOTSTRAP}"
            )
        return v

    @model_validator(mode="after")
    def check_degrees(self):
        if self.p_min > self.p_max:
            raise ValueError(f"p_min={self.p_min} exceeds p_max={self.p_max}")
        return self


class RunConfig(BaseModel):
    """Complete run configuration document"""
    model_config = ConfigDict(extra="forbid")

    input_model: InputModelSpec
    limit_state: LimitStateSpec
    algorithm: AlgorithmSection = Field(default_factory=AlgorithmSection)
    seed: int = Field(default=0, ge=0)
    output: str = "abpce_out"


class BenchmarkSpec(ArrayModel):
    """Built-in problem: inputs, limit state, reference pf and canned settings"""
    name: str
    random_vector: RandomVector
    limit_state: LimitState
    reference_pf: Optional[float] = Field(default=None, gt=0, lt=1)
    reference_source: str = ""
    settings: Dict[str, Any] = Field(default_factory=dict)

    @property
    def reference_beta(self) -> Optional[float]:
        if self.reference_pf is None:
            return None
        from scipy.special import ndtri
        return float(-ndtri(self.reference_pf))


class RunReport(BaseModel):
    """Structured summary written next to the CSV artifacts"""
    version: str
    fingerprint: str
    config: Dict[str, Any]
    result: AbpceResult
    # logged only; report.json stays byte-reproducible
    timing_seconds: Optional[float] = Field(default=None, exclude=True)
    reference_pf: Optional[float] = None
    reference_relative_error: Optional[float] = None

    def exit_code(self) -> int:
        return 0 if self.result.converged else 2
