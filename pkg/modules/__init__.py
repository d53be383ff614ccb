# Module initialization file
"""
Active bootstrap-PCE structural reliability

This package provides:
- Type-safe input models and results (Pydantic)
- Isoprobabilistic transform and design samplers
- Sparse polynomial chaos surrogates (hybrid LARS + LOO selection)
- Bootstrap ensembles and the active enrichment loop
- Benchmarks, external-model coupling and run artifacts
"""

__version__ = "1.0.0"

__all__ = [
    "models",
    "config",
    "errors",
    "state",
    "input_model",
    "chaos_basis",
    "regression",
    "bootstrap",
    "enrichment",
    "engine",
    "truss",
    "benchmarks",
    "external",
    "adapter",
    "validation",
    "report",
]
