"""
Adapter from run configurations to engine objects.
Keeps the command-line layer free of construction details.
"""

import logging
from typing import Dict, Optional

from modules.benchmarks import INPUT_MODELS, get_benchmark
from modules.external import ExternalModel
from modules.input_model import build_random_vector, marginal_from_moments
from modules.models import (
    AdaptiveConfig, AlgorithmSection, BenchmarkSpec, Comparison, ConvergenceConfig, EnrichmentConfig,
    Family, InitialDesignSpec, LimitState, LimitStateSpec, InputModelSpec, MarginalDistribution,
    MarginalSpec, RandomVector, RunConfig,
)
from modules.state import fingerprint

logger = logging.getLogger(__name__)


class RunAdapter:
    """Converts between configuration documents and engine inputs"""

    @staticmethod
    def build_marginal(spec: MarginalSpec) -> MarginalDistribution:
        """Marginal from moments (Gaussian, Lognormal, Gumbel) or direct parameters"""
        if spec.params is not None:
            return MarginalDistribution(family=spec.family, params=spec.params, name=spec.name, unit=spec.unit)
        if spec.family in (Family.UNIFORM, Family.TRUNCATED_GAUSSIAN):
            raise ValueError(f"{spec.family.value} marginals are given by params, not mean/std")
        return marginal_from_moments(spec.family, spec.mean, spec.std, spec.name, spec.unit)

    @staticmethod
    def build_random_vector(spec: InputModelSpec) -> RandomVector:
        if spec.builtin is not None:
            return INPUT_MODELS[spec.builtin]()
        marginals = [RunAdapter.build_marginal(m) for m in spec.marginals]
        return build_random_vector(marginals, spec.copula)

    @staticmethod
    def build_limit_state(spec: LimitStateSpec) -> LimitState:
        if spec.builtin is not None:
            limit_state = get_benchmark(spec.builtin).limit_state
            if spec.threshold is not None:
                limit_state = limit_state.model_copy(update={"threshold": spec.threshold})
            return limit_state
        return LimitState(
            model=ExternalModel(spec.command, workdir=spec.workdir, parallel=spec.parallel),
            comparison=Comparison.THRESHOLD if spec.threshold is not None else Comparison.IDENTITY,
            threshold=spec.threshold,
            name="external",
        )

    @staticmethod
    def design_spec(algo: AlgorithmSection) -> InitialDesignSpec:
        return InitialDesignSpec(design=algo.design, size=algo.n_ini,
                                 radius=algo.ball_radius, centered=algo.centered_lhs)

    @staticmethod
    def enrichment_config(algo: AlgorithmSection) -> EnrichmentConfig:
        return EnrichmentConfig(k=algo.k)

    @staticmethod
    def convergence_config(algo: AlgorithmSection) -> ConvergenceConfig:
        return ConvergenceConfig(
            epsilon_pf=algo.epsilon_pf,
            required_consecutive=algo.consecutive,
            n_max=algo.n_max,
            n_bootstrap=algo.n_bootstrap,
            n_mcs=algo.n_mcs,
            mode=algo.mode,
            target_cov=algo.target_cov,
            n_mcs_batch=algo.n_mcs_batch,
            n_mcs_max=algo.n_mcs_max,
        )

    @staticmethod
    def adaptive_config(algo: AlgorithmSection) -> AdaptiveConfig:
        return AdaptiveConfig(
            p_min=algo.p_min, p_max=algo.p_max, q_norm=algo.q_norm,
            max_interaction=algo.max_interaction, early_stop_patience=algo.early_stop_patience,
        )

    @staticmethod
    def engine_inputs(run: RunConfig) -> Dict:
        """Keyword arguments for engine.run_abpce"""
        algo = run.algorithm
        return {
            'rv': RunAdapter.build_random_vector(run.input_model),
            'limit_state': RunAdapter.build_limit_state(run.limit_state),
            'design_spec': RunAdapter.design_spec(algo),
            'enrichment_cfg': RunAdapter.enrichment_config(algo),
            'convergence_cfg': RunAdapter.convergence_config(algo),
            'adaptive_cfg': RunAdapter.adaptive_config(algo),
            'seed': run.seed,
        }

    @staticmethod
    def benchmark_config(spec: BenchmarkSpec, seed: int = 0, output: str = "abpce_out",
                         n_mcs: Optional[int] = None) -> RunConfig:
        """Run configuration reproducing a built-in benchmark with its canned settings"""
        algorithm = dict(spec.settings)
        if n_mcs is not None:
            algorithm['n_mcs'] = n_mcs
        return RunConfig.model_validate({
            'input_model': {'builtin': spec.name},
            'limit_state': {'builtin': spec.name},
            'algorithm': algorithm,
            'seed': seed,
            'output': output,
        })

    @staticmethod
    def run_fingerprint(run: RunConfig) -> str:
        """Fingerprint of everything that determines the run's output"""
        return fingerprint(run.model_dump(mode="json", exclude={"output"}))
