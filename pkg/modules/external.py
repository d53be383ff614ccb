"""
External model coupling through files.

Per batch: `candidates.csv` (header x1..xM, 17 significant digits) is
written to a fresh batch directory, the command is run with that directory
as its last argument, and `responses.csv` (one column `y`, same row order)
is read back.
"""

import logging
import shlex
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from modules.config import config
from modules.errors import ExternalModelError

logger = logging.getLogger(__name__)

CANDIDATES_FILE = "candidates.csv"
RESPONSES_FILE = "responses.csv"


def write_candidates(path: Path, X: np.ndarray):
    columns = [f"x{i + 1}" for i in range(X.shape[1])]
    pd.DataFrame(X, columns=columns).to_csv(path, index=False, float_format=config.FLOAT_FORMAT)


def read_responses(path: Path, n_expected: int, batch_dir: Path, X: np.ndarray) -> np.ndarray:
    if not path.exists():
        raise ExternalModelError(f"command did not write {RESPONSES_FILE}", batch_dir, X)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ExternalModelError(f"unreadable {RESPONSES_FILE}: {e}", batch_dir, X)
    if "y" not in frame.columns:
        raise ExternalModelError(f"{RESPONSES_FILE} has no 'y' column (found {list(frame.columns)})", batch_dir, X)
    if len(frame) != n_expected:
        raise ExternalModelError(
            f"{RESPONSES_FILE} has {len(frame)} rows for {n_expected} candidates", batch_dir, X
        )
    values = pd.to_numeric(frame["y"], errors="coerce").to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        raise ExternalModelError(f"{RESPONSES_FILE} contains non-numeric or non-finite values", batch_dir, X)
    return values


class ExternalModel:
    """
    Callable limit-state model backed by a user command.
    Batches run sequentially by default; with parallel=True every point gets
    its own directory and the commands run concurrently.
    """

    def __init__(self, command: str, workdir: Optional[str] = None, parallel: bool = False,
                 max_workers: Optional[int] = None, timeout: Optional[float] = None):
        self.command = shlex.split(command)
        if not self.command:
            raise ValueError("external command is empty")
        self.workdir = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="abpce_batches_"))
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.parallel = parallel
        self.max_workers = max_workers
        self.timeout = timeout
        self._batches = 0

    def _next_dir(self, suffix: str = "") -> Path:
        self._batches += 1
        path = self.workdir / f"batch_{self._batches:05d}{suffix}"
        path.mkdir(parents=True, exist_ok=False)
        return path

    def run_batch(self, batch_dir: Path, X: np.ndarray) -> np.ndarray:
        """Execute the protocol once in an existing empty directory"""
        write_candidates(batch_dir / CANDIDATES_FILE, X)
        logger.debug("External batch %s: %d point(s)", batch_dir, X.shape[0])
        try:
            completed = subprocess.run(
                self.command + [str(batch_dir)],
                capture_output=True, text=True, timeout=self.timeout,
            )
        except FileNotFoundError:
            raise ExternalModelError(f"command not found: {self.command[0]}", batch_dir, X)
        except subprocess.TimeoutExpired:
            raise ExternalModelError(f"command timed out after {self.timeout}s", batch_dir, X)
        if completed.returncode != 0:
            stderr = completed.stderr.strip().splitlines()[-5:]
            raise ExternalModelError(
                f"command exited with status {completed.returncode}: {' | '.join(stderr)}", batch_dir, X
            )
        return read_responses(batch_dir / RESPONSES_FILE, X.shape[0], batch_dir, X)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not self.parallel or X.shape[0] == 1:
            return self.run_batch(self._next_dir(), X)

        dirs: List[Path] = []
        self._batches += 1
        for i in range(X.shape[0]):
            path = self.workdir / f"batch_{self._batches:05d}_p{i:03d}"
            path.mkdir(parents=True, exist_ok=False)
            dirs.append(path)
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = [executor.submit(self.run_batch, d, X[i:i + 1]) for i, d in enumerate(dirs)]
            return np.concatenate([f.result() for f in futures])


def external_model_protocol(command: str, points: np.ndarray, workdir: Optional[str] = None) -> np.ndarray:
    """One sequential batch through the file protocol"""
    return ExternalModel(command, workdir=workdir)(points)
