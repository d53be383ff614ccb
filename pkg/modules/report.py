"""
Run artifacts: history, design, replicate estimates and the JSON report.
All floats are written with 17 significant digits so reloading them
reproduces the in-memory values bit for bit.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from modules.config import config
from modules.models import AbpceResult, ExperimentalDesign, IterationRecord, RunReport

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = [
    "iteration", "n_total", "pf_hat", "pf_minus", "pf_plus", "beta", "criterion",
    "pf_q_lower", "pf_q_upper", "beta_minus", "beta_plus",
    "cov_mcs", "n_mcs", "degree", "n_terms", "loo_error", "n_margin",
]


def history_frame(history: List[IterationRecord]) -> pd.DataFrame:
    rows = [record.model_dump(include=set(HISTORY_COLUMNS)) for record in history]
    return pd.DataFrame(rows, columns=HISTORY_COLUMNS)


def _write(frame: pd.DataFrame, path: Path, **kwargs):
    frame.to_csv(path, index=False, float_format=config.FLOAT_FORMAT, **kwargs)


class HistoryWriter:
    """
    Appends each iteration to history.csv as soon as it is recorded,
    so a failed run still leaves its partial history behind.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        _write(pd.DataFrame(columns=HISTORY_COLUMNS), self.path)

    def __call__(self, record: IterationRecord):
        _write(history_frame([record]), self.path, mode="a", header=False)


def write_history(history: List[IterationRecord], path: Path):
    _write(history_frame(history), Path(path))


def write_design(design: ExperimentalDesign, path: Path, names: Optional[List[str]] = None):
    names = names or [f"x{i + 1}" for i in range(design.inputs.shape[1])]
    frame = pd.DataFrame(design.inputs, columns=names)
    frame["y"] = design.responses
    _write(frame, Path(path))


def write_replicates(pfs: List[float], path: Path):
    _write(pd.DataFrame({"replicate": np.arange(len(pfs)), "pf": pfs}), Path(path))


def write_report(report: RunReport, path: Path):
    Path(path).write_text(report.model_dump_json(indent=2))


def write_run(out_dir: Path, result: AbpceResult, report: RunReport,
              names: Optional[List[str]] = None, history_written: bool = False):
    """history.csv, design.csv, replicate_pf.csv and report.json in out_dir"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not history_written:
        write_history(result.history, out_dir / "history.csv")
    if result.design is not None:
        write_design(result.design, out_dir / "design.csv", names)
    write_replicates(result.replicate_pfs, out_dir / "replicate_pf.csv")
    write_report(report, out_dir / "report.json")
    logger.info("Artifacts written to %s", out_dir)


def write_band_demo(demo: Dict[str, np.ndarray], out_dir: Path):
    """band.csv, trajectories.csv and design.csv of the bootstrap trajectory demo"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write(pd.DataFrame({
        "x": demo["grid"], "true": demo["true"], "pce": demo["pce"],
        "lower": demo["lower"], "upper": demo["upper"],
    }), out_dir / "band.csv")

    trajectories = pd.DataFrame(
        demo["trajectories"].T, columns=[f"b{k}" for k in range(demo["trajectories"].shape[0])]
    )
    trajectories.insert(0, "x", demo["grid"])
    _write(trajectories, out_dir / "trajectories.csv")

    _write(pd.DataFrame({
        "x": demo["design_x"], "y": demo["design_y"],
        "lower": demo["design_lower"], "upper": demo["design_upper"],
    }), out_dir / "design.csv")
    logger.info("Band demo written to %s", out_dir)
