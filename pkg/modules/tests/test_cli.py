"""
Test suite for the command-line layer - config validation, artifacts and the external model protocol
Run with: pytest modules/tests/test_cli.py -v
"""

import json
import shlex
import sys

import numpy as np
import pandas as pd
import pytest

import abpce
from modules.adapter import RunAdapter
from modules.benchmarks import get_benchmark
from modules.errors import ConfigError, ExternalModelError
from modules.external import ExternalModel, external_model_protocol
from modules.validation import validate_config

ECHO_MODEL = """
import csv, sys
from pathlib import Path

batch = Path(sys.argv[-1])
with open(batch / "candidates.csv") as f:
    rows = list(csv.DictReader(f))
with open(batch / "responses.csv", "w") as f:
    f.write("y\\n")
    for row in rows:
        f.write(row["x1"] + "\\n")
"""

FAILING_MODEL = """
import sys
sys.stderr.write("mesh generation failed\\n")
sys.exit(3)
"""


# ============= FIXTURES =============

@pytest.fixture
def oracle_config():
    return {
        "input_model": {"builtin": "linear_oracle"},
        "limit_state": {"builtin": "linear_oracle"},
        "algorithm": {"n_ini": 12, "n_bootstrap": 20, "n_mcs": 20000, "n_max": 30, "p_max": 3},
        "seed": 4,
    }


@pytest.fixture
def write_config(tmp_path):
    def write(document, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return path
    return write


@pytest.fixture
def echo_command(tmp_path):
    script = tmp_path / "echo_model.py"
    script.write_text(ECHO_MODEL)
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(script))}"


# ============= VALIDATION TESTS =============

def test_valid_builtin_config_parses(oracle_config):
    run, warnings = validate_config(oracle_config)
    assert run.algorithm.n_bootstrap == 20
    assert run.seed == 4
    assert any("n_mcs" in w for w in warnings)


def test_bootstrap_floor_enforced(oracle_config):
    oracle_config["algorithm"]["n_bootstrap"] = 10
    with pytest.raises(ConfigError) as info:
        validate_config(oracle_config)
    assert any("B >= 20" in d for d in info.value.diagnostics)


def test_non_positive_definite_copula_named():
    document = {
        "input_model": {
            "marginals": [
                {"family": "gaussian", "mean": 0.0, "std": 1.0},
                {"family": "gaussian", "mean": 0.0, "std": 1.0},
            ],
            "copula": [[1.0, 1.2], [1.2, 1.0]],
        },
        "limit_state": {"command": "true", "threshold": 1.0},
    }
    with pytest.raises(ConfigError) as info:
        validate_config(document)
    assert any("input_model.copula" in d and "positive-definite" in d for d in info.value.diagnostics)


def test_unknown_keys_and_names_reported(oracle_config):
    oracle_config["algorithm"]["epsilon"] = 0.1
    with pytest.raises(ConfigError) as info:
        validate_config(oracle_config)
    assert any("epsilon" in d for d in info.value.diagnostics)

    document = {"input_model": {"builtin": "bridge"}, "limit_state": {"builtin": "bridge"}}
    with pytest.raises(ConfigError) as info:
        validate_config(document)
    assert len(info.value.diagnostics) == 2


def test_budget_below_initial_design(oracle_config):
    oracle_config["algorithm"]["n_max"] = 5
    with pytest.raises(ConfigError, match="n_max"):
        validate_config(oracle_config)


def test_missing_or_malformed_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        validate_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        validate_config(bad)


def test_benchmark_config_round_trips_through_validation():
    run = RunAdapter.benchmark_config(get_benchmark("four_branch"), seed=1, n_mcs=5000)
    parsed, _ = validate_config(run.model_dump(mode="json"))
    assert parsed == run
    assert parsed.algorithm.k == 3


def test_run_fingerprint_ignores_output_directory():
    run = RunAdapter.benchmark_config(get_benchmark("four_branch"), seed=1, output="a")
    moved = run.model_copy(update={"output": "b"})
    reseeded = run.model_copy(update={"seed": 2})
    assert RunAdapter.run_fingerprint(run) == RunAdapter.run_fingerprint(moved)
    assert RunAdapter.run_fingerprint(run) != RunAdapter.run_fingerprint(reseeded)
    assert len(RunAdapter.run_fingerprint(run)) == 64


# ============= COMMAND TESTS =============

def test_validate_command_exit_codes(oracle_config, write_config, capsys):
    assert abpce.main(["validate", str(write_config(oracle_config))]) == 0

    oracle_config["algorithm"]["n_bootstrap"] = 10
    assert abpce.main(["validate", str(write_config(oracle_config, "bad.json"))]) == 1
    assert "B >= 20" in capsys.readouterr().err


def test_run_writes_artifacts_deterministically(oracle_config, write_config, tmp_path):
    config_path = write_config(oracle_config)
    first, second = tmp_path / "first", tmp_path / "second"
    names = ("history.csv", "design.csv", "replicate_pf.csv", "report.json")
    assert abpce.main(["-q", "run", str(config_path), "--out", str(first)]) == 0
    written = {name: (first / name).read_bytes() for name in names}
    assert abpce.main(["-q", "run", str(config_path), "--out", str(first)]) == 0
    for name in names:
        assert (first / name).read_bytes() == written[name]

    assert abpce.main(["-q", "run", str(config_path), "--out", str(second)]) == 0
    for name in ("history.csv", "design.csv", "replicate_pf.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    history = pd.read_csv(first / "history.csv", float_precision="round_trip")
    assert list(history["iteration"]) == list(range(len(history)))
    replicates = pd.read_csv(first / "replicate_pf.csv")
    assert len(replicates) == 20

    report = json.loads((first / "report.json").read_text())
    assert report["result"]["converged"] is True
    assert "timing_seconds" not in report
    assert report["result"]["n_total"] == len(pd.read_csv(first / "design.csv"))
    assert report["fingerprint"] == json.loads((second / "report.json").read_text())["fingerprint"]


def test_run_seed_override_changes_design(oracle_config, write_config, tmp_path):
    config_path = write_config(oracle_config)
    assert abpce.main(["-q", "run", str(config_path), "--out", str(tmp_path / "a")]) == 0
    assert abpce.main(["-q", "run", str(config_path), "--seed", "5", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "design.csv").read_bytes() != (tmp_path / "b" / "design.csv").read_bytes()


def test_budget_exhausted_exit_code(write_config, tmp_path):
    document = {
        "input_model": {"builtin": "four_branch"},
        "limit_state": {"builtin": "four_branch"},
        "algorithm": {"n_ini": 20, "n_max": 20, "n_bootstrap": 20, "n_mcs": 2000, "p_min": 2, "p_max": 3},
    }
    assert abpce.main(["-q", "run", str(write_config(document)), "--out", str(tmp_path / "out")]) == 2
    assert (tmp_path / "out" / "history.csv").exists()


def test_sinc_benchmark_writes_band_demo(tmp_path):
    out = tmp_path / "sinc"
    assert abpce.main(["-q", "benchmark", "sinc_1d", "--out", str(out)]) == 0
    band = pd.read_csv(out / "band.csv")
    assert list(band.columns) == ["x", "true", "pce", "lower", "upper"]
    assert len(band) == 200
    assert pd.read_csv(out / "trajectories.csv").shape == (200, 101)


# ============= EXTERNAL MODEL TESTS =============

def test_external_echo_model(echo_command, tmp_path):
    points = np.random.default_rng(0).standard_normal((7, 3))
    responses = external_model_protocol(echo_command, points, workdir=str(tmp_path / "batches"))
    np.testing.assert_array_equal(responses, points[:, 0])
    assert (tmp_path / "batches" / "batch_00001" / "candidates.csv").exists()


def test_external_parallel_batches(echo_command, tmp_path):
    model = ExternalModel(echo_command, workdir=str(tmp_path / "par"), parallel=True, max_workers=2)
    points = np.arange(8.0).reshape(4, 2)
    np.testing.assert_array_equal(model(points), points[:, 0])
    assert (tmp_path / "par" / "batch_00001_p003").is_dir()


def test_external_failure_names_batch_directory(tmp_path):
    script = tmp_path / "failing_model.py"
    script.write_text(FAILING_MODEL)
    command = f"{shlex.quote(sys.executable)} {shlex.quote(str(script))}"
    with pytest.raises(ExternalModelError) as info:
        ExternalModel(command, workdir=str(tmp_path / "fail"))(np.zeros((2, 1)))
    assert "batch_00001" in str(info.value)
    assert "mesh generation failed" in str(info.value)
    assert info.value.points.shape == (2, 1)


def test_external_run_end_to_end(echo_command, write_config, tmp_path):
    document = {
        "input_model": {"marginals": [{"family": "gaussian", "name": "X1", "mean": 0.0, "std": 1.0}]},
        "limit_state": {"command": echo_command, "workdir": str(tmp_path / "batches"), "threshold": 3.0},
        "algorithm": {"n_ini": 12, "n_bootstrap": 20, "n_mcs": 20000, "n_max": 20, "p_max": 2},
    }
    out = tmp_path / "ext"
    assert abpce.main(["-q", "run", str(write_config(document)), "--out", str(out)]) == 0
    design = pd.read_csv(out / "design.csv", float_precision="round_trip")
    np.testing.assert_array_equal(design["y"], design["X1"])
