"""
Validation module - run configuration checks and history consistency
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from .benchmarks import BENCHMARKS, INPUT_MODELS
from .adapter import RunAdapter
from .config import config
from .errors import ConfigError
from .models import AlgorithmSection, InputModelSpec, IterationRecord, LimitStateSpec, RunConfig

logger = logging.getLogger(__name__)

# Built-in limit states whose response is compared to a threshold
THRESHOLD_BENCHMARKS = {"truss", "linear_oracle"}


def _format_pydantic(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        messages.append(f"{location}: {item['msg']}")
    return messages


class ConfigValidator:
    """Semantic checks that a schema cannot express"""

    @staticmethod
    def validate_input_model(spec: InputModelSpec) -> Tuple[List[str], List[str]]:
        """Builtin names, marginal parameters and copula positive-definiteness"""
        errors = []
        warnings = []

        if spec.builtin is not None:
            if spec.builtin not in INPUT_MODELS:
                errors.append(
                    f"input_model.builtin: unknown input model '{spec.builtin}'; "
                    f"choose from {sorted(INPUT_MODELS)}"
                )
            return errors, warnings

        for i, marginal in enumerate(spec.marginals):
            try:
                RunAdapter.build_marginal(marginal)
            except ValueError as e:
                errors.append(f"input_model.marginals.{i}: {e}")

        if spec.copula is not None:
            R = np.asarray(spec.copula, dtype=float)
            m = len(spec.marginals)
            if R.shape != (m, m):
                errors.append(f"input_model.copula: copula matrix must be {m}x{m}, got {R.shape}")
            elif not np.allclose(R, R.T, rtol=0, atol=1e-12) or not np.allclose(np.diag(R), 1.0):
                errors.append("input_model.copula: copula matrix must be symmetric with unit diagonal")
            elif np.linalg.eigvalsh(R).min() <= 0:
                errors.append(
                    f"input_model.copula: copula matrix is not positive-definite "
                    f"(smallest eigenvalue {np.linalg.eigvalsh(R).min():.3e})"
                )
        return errors, warnings

    @staticmethod
    def validate_limit_state(spec: LimitStateSpec) -> Tuple[List[str], List[str]]:
        """Builtin names, thresholds and external command settings"""
        errors = []
        warnings = []

        if spec.builtin is not None:
            if spec.builtin not in BENCHMARKS:
                errors.append(
                    f"limit_state.builtin: unknown limit state '{spec.builtin}'; "
                    f"choose from {sorted(BENCHMARKS)}"
                )
            elif spec.threshold is not None and spec.builtin not in THRESHOLD_BENCHMARKS:
                errors.append(f"limit_state.threshold: '{spec.builtin}' does not take a threshold")
            if spec.builtin == "sinc_1d":
                warnings.append("sinc_1d has no failure domain; use 'benchmark sinc_1d' for the band demo")
            if spec.parallel or spec.workdir:
                warnings.append("parallel/workdir only apply to external commands")
        else:
            if not spec.command.strip():
                errors.append("limit_state.command: external command is empty")
            if spec.workdir is not None and Path(spec.workdir).exists() and not Path(spec.workdir).is_dir():
                errors.append(f"limit_state.workdir: {spec.workdir} is not a directory")
            if spec.threshold is None:
                warnings.append("external model responses are used directly as g (no threshold given)")
        return errors, warnings

    @staticmethod
    def validate_algorithm(algo: AlgorithmSection, dimension: int) -> Tuple[List[str], List[str]]:
        """Budget against the initial design, typical criterion range"""
        errors = []
        warnings = []

        n_ini = algo.n_ini or config.initial_design_size(dimension)
        if algo.n_max < n_ini:
            errors.append(f"algorithm.n_max: budget {algo.n_max} is below the initial design size {n_ini}")
        if algo.n_mcs_max < algo.n_mcs:
            errors.append(f"algorithm.n_mcs_max: {algo.n_mcs_max} is below n_mcs={algo.n_mcs}")

        if algo.epsilon_pf < config.EPSILON_TYPICAL_MIN:
            warnings.append(
                f"epsilon_pf {algo.epsilon_pf} is below the typical range "
                f"[{config.EPSILON_TYPICAL_MIN}, {config.EPSILON_TYPICAL_MAX}]; convergence may be slow"
            )
        elif algo.epsilon_pf > config.EPSILON_TYPICAL_MAX:
            warnings.append(
                f"epsilon_pf {algo.epsilon_pf} is above the typical range "
                f"[{config.EPSILON_TYPICAL_MIN}, {config.EPSILON_TYPICAL_MAX}]"
            )
        if algo.n_mcs < 100_000:
            warnings.append(f"n_mcs={algo.n_mcs} limits the smallest resolvable pf to ~{10 / algo.n_mcs:.1e}")
        if algo.p_max > 15:
            warnings.append(f"p_max={algo.p_max}: high degrees need large designs to be selected")
        return errors, warnings

    @staticmethod
    def validate_run(run: RunConfig) -> Dict[str, List[str]]:
        """Complete semantic validation of a parsed run configuration"""
        all_errors = []
        all_warnings = []

        errors, warnings = ConfigValidator.validate_input_model(run.input_model)
        all_errors.extend(errors)
        all_warnings.extend(warnings)

        errors, warnings = ConfigValidator.validate_limit_state(run.limit_state)
        all_errors.extend(errors)
        all_warnings.extend(warnings)

        if run.input_model.builtin is not None and run.input_model.builtin in INPUT_MODELS:
            dimension = INPUT_MODELS[run.input_model.builtin]().dimension
        else:
            dimension = len(run.input_model.marginals or [])
        if dimension:
            errors, warnings = ConfigValidator.validate_algorithm(run.algorithm, dimension)
            all_errors.extend(errors)
            all_warnings.extend(warnings)

        return {'errors': all_errors, 'warnings': all_warnings}


def validate_config(document: Union[str, Path, Dict]) -> Tuple[RunConfig, List[str]]:
    """
    Parse and validate a run configuration (JSON file path or dict).
    Returns the parsed configuration and its warnings; raises ConfigError
    carrying every diagnostic.
    """
    if isinstance(document, dict):
        raw = document
    else:
        path = Path(document)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError([f"config file not found: {path}"])
        except json.JSONDecodeError as e:
            raise ConfigError([f"{path}: invalid JSON at line {e.lineno}: {e.msg}"])

    try:
        run = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_format_pydantic(e))

    report = ConfigValidator.validate_run(run)
    if report['errors']:
        raise ConfigError(report['errors'])
    for warning in report['warnings']:
        logger.warning(warning)
    return run, report['warnings']


class HistoryConsistencyChecker:
    """Checks that recorded iterations obey the estimator algebra"""

    @staticmethod
    def check_record(record: IterationRecord, tol: float = 1e-12) -> List[str]:
        issues = []
        if record.pf_minus > record.pf_plus:
            issues.append(f"iteration {record.iteration}: pf_minus {record.pf_minus} > pf_plus {record.pf_plus}")
        if not record.pf_minus <= record.pf_q_lower <= record.pf_q_upper <= record.pf_plus:
            issues.append(f"iteration {record.iteration}: quantile bounds outside the min/max envelope")
        if record.pf_hat > 0:
            expected = (record.pf_plus - record.pf_minus) / record.pf_hat
            if abs(expected - record.criterion) > tol * max(1.0, abs(expected)):
                issues.append(
                    f"iteration {record.iteration}: criterion {record.criterion} != recomputed {expected}"
                )
        elif record.criterion != float("inf"):
            issues.append(f"iteration {record.iteration}: zero pf_hat must give an infinite criterion")
        return issues

    @staticmethod
    def check_history(history: List[IterationRecord]) -> Dict[str, object]:
        issues = []
        for record in history:
            issues.extend(HistoryConsistencyChecker.check_record(record))
        for previous, current in zip(history, history[1:]):
            added = len(previous.selected)
            if current.n_total != previous.n_total + added:
                issues.append(
                    f"iteration {current.iteration}: n_total {current.n_total} != "
                    f"{previous.n_total} + {added} enrichment points"
                )
        return {'is_consistent': len(issues) == 0, 'issues': issues}
