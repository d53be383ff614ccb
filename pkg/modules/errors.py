"""
Exception types raised by the reliability engine and the command-line front end
"""

from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np


class AbpceError(Exception):
    """Base class for all domain errors"""


class ModelEvaluationError(AbpceError):
    """The limit-state model failed on a batch of points"""

    def __init__(self, message: str, points: Optional[np.ndarray] = None):
        super().__init__(message)
        self.points = None if points is None else np.array(points, dtype=float)


class ExternalModelError(ModelEvaluationError):
    """The external model protocol failed for one batch directory"""

    def __init__(self, message: str, batch_dir: Path, points: Optional[np.ndarray] = None):
        super().__init__(f"{message} (batch directory: {batch_dir})", points)
        self.batch_dir = Path(batch_dir)


class ConfigError(AbpceError):
    """A run configuration failed validation"""

    def __init__(self, diagnostics: Sequence[str]):
        self.diagnostics: List[str] = list(diagnostics)
        super().__init__("; ".join(self.diagnostics) or "invalid configuration")


class PoolExhaustedError(AbpceError):
    """Every candidate point is already part of the experimental design"""
