"""
Built-in reliability problems: 1D demo function, four-branch series
system, 23-bar truss, 21-dimensional frame input model and a
closed-form linear oracle.
"""

import math
from typing import Callable, Dict, List

import numpy as np
from scipy.special import ndtr

from modules.config import config
from modules.bootstrap import band_from_predictions, ensemble_predict, fit_ensemble
from modules.input_model import build_random_vector, marginal_from_moments, sample_lhs, truncated_gaussian, uniform
from modules.models import (
    AdaptiveConfig, BenchmarkSpec, BootstrapMode, Comparison, ExperimentalDesign, Family, LimitState, RandomVector,
)
from modules.regression import adaptive_fit, predict
from modules.state import STREAM_BOOTSTRAP, STREAM_INITIAL_DESIGN, substream
from modules.truss import truss_displacement

SQRT2 = math.sqrt(2.0)
TRUSS_THRESHOLD = 0.12     # m
LINEAR_THRESHOLD = 3.0


# ============= TEST FUNCTIONS =============

def sinc_1d(x):
    """x sin(x)"""
    x = np.asarray(x, dtype=float)
    return x * np.sin(x)


def four_branch(x1, x2):
    """Series system of four components; g <= 0 is failure"""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    quad = 3 + 0.1 * (x1 - x2) ** 2
    return np.minimum.reduce([
        quad - (x1 + x2) / SQRT2,
        quad + (x1 + x2) / SQRT2,
        (x1 - x2) + 6 / SQRT2,
        (x2 - x1) + 6 / SQRT2,
    ])


def _columns(fn: Callable, n_inputs: int) -> Callable[[np.ndarray], np.ndarray]:
    """Batch model X (N x M) -> responses from a function of separate columns"""
    def model(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != n_inputs:
            raise ValueError(f"model takes {n_inputs} inputs, got {X.shape[1]}")
        return fn(*(X[:, i] for i in range(n_inputs)))
    return model


# ============= INPUT MODELS =============

def standard_normal_inputs(dimension: int) -> RandomVector:
    return build_random_vector(
        [marginal_from_moments(Family.GAUSSIAN, 0.0, 1.0, name=f"X{i + 1}") for i in range(dimension)]
    )


def truss_inputs() -> RandomVector:
    """A1, A2, E1, E2, P1..P6; mutually independent"""
    lognormal = lambda mean, std, name, unit: marginal_from_moments(Family.LOGNORMAL, mean, std, name, unit)
    marginals = [
        lognormal(2.0e-3, 2.0e-4, "A1", "m^2"),
        lognormal(1.0e-3, 1.0e-4, "A2", "m^2"),
        lognormal(2.1e11, 2.1e10, "E1", "Pa"),
        lognormal(2.1e11, 2.1e10, "E2", "Pa"),
    ]
    marginals += [
        marginal_from_moments(Family.GUMBEL, 5.0e4, 7.5e3, f"P{i}", "N") for i in range(1, 7)
    ]
    return build_random_vector(marginals)


# (name, mean, std); moments of the untruncated Gaussians for E, I, A
_FRAME_LOADS = [("P1", 133.454, 40.04), ("P2", 88.97, 35.59), ("P3", 71.175, 28.47)]
_FRAME_MODULI = [("E4", 2.1738e7, 1.9152e6), ("E5", 2.3796e7, 1.9152e6)]
_FRAME_INERTIAS = [
    ("I6", 8.1344e-3, 1.0834e-3), ("I7", 1.1509e-2, 1.2980e-3),
    ("I8", 2.1375e-2, 2.5961e-3), ("I9", 2.5961e-2, 3.0288e-3),
    ("I10", 1.0812e-2, 2.5961e-3), ("I11", 1.4105e-2, 3.4615e-3),
    ("I12", 2.3279e-2, 5.6249e-3), ("I13", 2.5961e-2, 6.4902e-3),
]
_FRAME_AREAS = [
    ("A14", 3.1256e-1, 5.5815e-2), ("A15", 3.7210e-1, 7.4420e-2),
    ("A16", 5.0606e-1, 9.3025e-2), ("A17", 5.5815e-1, 1.1163e-1),
    ("A18", 2.5302e-1, 9.3025e-2), ("A19", 2.9117e-1, 1.0232e-1),
    ("A20", 3.7303e-1, 1.2093e-1), ("A21", 4.1860e-1, 1.9537e-1),
]

FRAME_MODULI_CORRELATION = 0.9
FRAME_SAME_ELEMENT_CORRELATION = 0.95
FRAME_CROSS_ELEMENT_CORRELATION = 0.13


def frame_copula() -> np.ndarray:
    """
    21 x 21 Gaussian-copula matrix ordered P1-P3, E4, E5, I6-I13, A14-A21.
    Moduli 0.9; area and inertia of one element 0.95; any other pair of
    section properties 0.13; zero elsewhere.
    """
    R = np.eye(21)
    R[3, 4] = R[4, 3] = FRAME_MODULI_CORRELATION
    inertia = list(range(5, 13))
    area = list(range(13, 21))
    sections = inertia + area
    for a in sections:
        for b in sections:
            if a != b:
                R[a, b] = FRAME_CROSS_ELEMENT_CORRELATION
    for i, a in zip(inertia, area):
        R[i, a] = R[a, i] = FRAME_SAME_ELEMENT_CORRELATION
    if np.linalg.eigvalsh(R).min() <= 0:
        raise ValueError("frame copula matrix is not positive-definite")
    return R


def frame_input_spec() -> RandomVector:
    """21-dimensional frame inputs: lognormal loads, truncated-Gaussian section properties"""
    marginals = [marginal_from_moments(Family.LOGNORMAL, m, s, name, "kN") for name, m, s in _FRAME_LOADS]
    marginals += [truncated_gaussian(m, s, 0.0, math.inf, name, "kN/m^2") for name, m, s in _FRAME_MODULI]
    marginals += [truncated_gaussian(m, s, 0.0, math.inf, name, "m^4") for name, m, s in _FRAME_INERTIAS]
    marginals += [truncated_gaussian(m, s, 0.0, math.inf, name, "m^2") for name, m, s in _FRAME_AREAS]
    return build_random_vector(marginals, frame_copula())


# ============= BENCHMARK SPECS =============

def four_branch_spec() -> BenchmarkSpec:
    return BenchmarkSpec(
        name="four_branch",
        random_vector=standard_normal_inputs(2),
        limit_state=LimitState(model=_columns(four_branch, 2), name="four_branch"),
        reference_pf=4.460e-3,
        reference_source="MCS with 1e8 samples",
        settings=dict(config.BENCHMARK_SETTINGS["four_branch"]),
    )


def truss_spec() -> BenchmarkSpec:
    return BenchmarkSpec(
        name="truss",
        random_vector=truss_inputs(),
        limit_state=LimitState(model=truss_displacement, comparison=Comparison.THRESHOLD,
                               threshold=TRUSS_THRESHOLD, name="truss"),
        reference_pf=1.52e-3,
        reference_source="MCS, 6-bay Warren truss",
        settings=dict(config.BENCHMARK_SETTINGS["truss"]),
    )


def linear_oracle_spec() -> BenchmarkSpec:
    """u = X1 against threshold 3, X1 standard normal: pf = Phi(-3)"""
    return BenchmarkSpec(
        name="linear_oracle",
        random_vector=standard_normal_inputs(1),
        limit_state=LimitState(model=lambda X: np.asarray(X, dtype=float)[:, 0],
                               comparison=Comparison.THRESHOLD, threshold=LINEAR_THRESHOLD,
                               name="linear_oracle"),
        reference_pf=float(ndtr(-LINEAR_THRESHOLD)),
        reference_source="closed form",
        settings=dict(config.BENCHMARK_SETTINGS["linear_oracle"]),
    )


def sinc_1d_spec() -> BenchmarkSpec:
    """x sin(x) on Uniform(0, 2 pi); a surrogate demo, no failure probability"""
    return BenchmarkSpec(
        name="sinc_1d",
        random_vector=build_random_vector([uniform(0.0, 2 * math.pi, name="x")]),
        limit_state=LimitState(model=_columns(sinc_1d, 1), name="sinc_1d"),
        settings=dict(config.BENCHMARK_SETTINGS["sinc_1d"]),
    )


BENCHMARKS: Dict[str, Callable[[], BenchmarkSpec]] = {
    "four_branch": four_branch_spec,
    "truss": truss_spec,
    "linear_oracle": linear_oracle_spec,
    "sinc_1d": sinc_1d_spec,
}

INPUT_MODELS: Dict[str, Callable[[], RandomVector]] = {
    "four_branch": lambda: standard_normal_inputs(2),
    "truss": truss_inputs,
    "linear_oracle": lambda: standard_normal_inputs(1),
    "sinc_1d": lambda: sinc_1d_spec().random_vector,
    "frame_inputs": frame_input_spec,
}


def get_benchmark(name: str) -> BenchmarkSpec:
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark '{name}'; choose from {sorted(BENCHMARKS)}")
    return BENCHMARKS[name]()


def available() -> List[str]:
    return sorted(BENCHMARKS)


# ============= BOOTSTRAP TRAJECTORY DEMO =============

def sinc_1d_demo(seed: int = 0, n_grid: int = 200, n_bootstrap: int = config.N_BOOTSTRAP,
                 level: float = config.BAND_LEVEL) -> Dict[str, np.ndarray]:
    """
    Sparse PCE of x sin(x) on a small LHS design with its bootstrap
    replicate curves and the empirical band on an interior grid of [0, 2 pi].
    """
    spec = sinc_1d_spec()
    settings = spec.settings
    rv = spec.random_vector
    X = sample_lhs(rv, settings['n_ini'], substream(seed, STREAM_INITIAL_DESIGN)).values
    ed = ExperimentalDesign(inputs=X, responses=spec.limit_state.model(X))
    surrogate = adaptive_fit(ed, rv, AdaptiveConfig(p_min=settings['p_min'], p_max=settings['p_max']))
    ensemble = fit_ensemble(ed, surrogate, BootstrapMode.FAST, n_bootstrap, substream(seed, STREAM_BOOTSTRAP, 0))

    grid = np.linspace(0.0, 2 * math.pi, n_grid + 2)[1:-1].reshape(-1, 1)
    trajectories = ensemble_predict(ensemble, grid)
    lower, upper = band_from_predictions(trajectories, level)
    ed_lower, ed_upper = band_from_predictions(ensemble_predict(ensemble, X), level)
    return {
        'grid': grid[:, 0],
        'true': sinc_1d(grid[:, 0]),
        'pce': predict(surrogate, grid),
        'lower': lower,
        'upper': upper,
        'trajectories': trajectories,
        'design_x': X[:, 0],
        'design_y': ed.responses,
        'design_lower': ed_lower,
        'design_upper': ed_upper,
        'design_fit': predict(surrogate, X),
    }
