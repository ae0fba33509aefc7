"""Unit tests for the command controllers."""

import argparse
import json
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from trimlab.cli.app import main
from trimlab.cli.controllers import manifest_arguments
from trimlab.cli.models import RunManifest
from trimlab.exceptions import ExperimentInterrupted
from trimlab.processes.dump import read_path
from trimlab.processes.generators import sample_path
from trimlab.processes.maps import canonical_luroth_map, canonical_observable
from trimlab.processes.models import Cell, LurothStep, PiecewiseMapSpec
from trimlab.utils.csv_io import PARTIAL_FOOTER, read_csv
from trimlab.utils.seeds import replica_key

SEED = "20240917"
VERIFY_ARGS = [
    "verify-mean",
    "--alpha",
    "0.5",
    "--schedule",
    "pow:0.7",
    "--checkpoints",
    "1e3",
    "--replicas",
    "3",
    "--seed",
    SEED,
]


def _interrupt_after_first(func, tasks, **kwargs):
    raise ExperimentInterrupted("stop", report=[func(tasks[0])])


def test_manifest_arguments():
    """Test that transient options and unset values are left out."""
    args = argparse.Namespace(
        command="mixing",
        workers=4,
        progress=True,
        verbose=False,
        config=None,
        handler=print,
        required=("seed",),
        seed=3,
        out=Path("out.csv"),
        anchor=None,
    )
    assert manifest_arguments(args) == {"out": "out.csv", "seed": 3}


def test_verify_mean_outputs(tmp_path):
    """Test that the report, summary and manifest are written."""
    out = tmp_path / "verify.csv"
    argv = VERIFY_ARGS + ["--process", "iid", "--out", str(out)]
    assert main(argv) == 0
    rows = read_csv(out)
    assert len(rows) == 1
    assert int(rows[0]["b"]) == 126
    levels = ["0.05", "0.1", "0.25", "0.5"]
    dev_prob = [float(rows[0][f"dev_prob_{level}"]) for level in levels]
    assert dev_prob == sorted(dev_prob, reverse=True)
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert not summary["partial"]
    manifest = RunManifest.read(tmp_path / "verify_manifest.json")
    assert manifest.master_seed == int(SEED)
    assert manifest.config_hash == summary["config_hash"]
    assert manifest.arguments["epsilon_grid"] == [0.05, 0.1, 0.25, 0.5]
    assert str(out) in manifest.outputs


def test_verify_mean_repeatable(tmp_path):
    """Test that the same seed gives byte-identical tables for any worker count."""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(VERIFY_ARGS + ["--process", "iid", "--out", str(first)]) == 0
    argv = VERIFY_ARGS + ["--process", "iid", "--out", str(second), "--workers", "2"]
    assert main(argv) == 0
    assert first.read_bytes() == second.read_bytes()


def _run_outputs(argv, out, workers):
    """Run a command and return its tables and summary without `wall_time`."""
    assert main(argv + ["--out", str(out), "--workers", str(workers)]) == 0
    tables = {path.name: path.read_bytes() for path in sorted(out.parent.glob("*.csv"))}
    summary = json.loads(out.with_name(f"{out.stem}_summary.json").read_text())
    del summary["wall_time"]
    return tables, summary


@pytest.mark.parametrize(
    "argv",
    [
        VERIFY_ARGS + ["--process", "luroth"],
        [
            "truncation-check",
            "--process",
            "iid",
            "--alpha",
            "0.5",
            "--schedule",
            "pow:0.7",
            "--checkpoints",
            "1e3",
            "--replicas",
            "6",
            "--seed",
            SEED,
        ],
        [
            "counterexample",
            "--gamma",
            "2",
            "--n",
            "1e3",
            "--b",
            "8",
            "--replicas",
            "40",
            "--seed",
            SEED,
        ],
        [
            "mixing",
            "--process",
            "doubling-pareto",
            "--gamma",
            "2",
            "--lags",
            "1..3",
            "--replicas",
            "10000",
            "--seed",
            SEED,
        ],
    ],
)
def test_outputs_independent_of_workers(tmp_path, argv):
    """Test byte-identical tables and equal summaries with one and four workers."""
    out = tmp_path / "run.csv"
    tables, summary = _run_outputs(argv, out, 1)
    assert tables
    assert _run_outputs(argv, out, 4) == (tables, summary)


def test_verify_mean_luroth_differs(tmp_path):
    """Test that the Lueroth process shares the schema but not the values."""
    iid, luroth = tmp_path / "iid.csv", tmp_path / "luroth.csv"
    assert main(VERIFY_ARGS + ["--process", "iid", "--out", str(iid)]) == 0
    assert main(VERIFY_ARGS + ["--process", "luroth", "--out", str(luroth)]) == 0
    iid_rows, luroth_rows = read_csv(iid), read_csv(luroth)
    assert list(iid_rows[0]) == list(luroth_rows[0])
    assert iid_rows[0]["mean_ratio"] != luroth_rows[0]["mean_ratio"]


def test_verify_mean_interrupted(tmp_path):
    """Test that an interrupted run flushes a partial report and fails."""
    out = tmp_path / "verify.csv"
    with patch(
        "trimlab.experiments.runners.map_ordered", side_effect=_interrupt_after_first
    ):
        code = main(VERIFY_ARGS + ["--process", "iid", "--out", str(out)])
    assert code == 1
    assert out.read_text().splitlines()[-1] == PARTIAL_FOOTER
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert summary["partial"]
    assert summary["metrics"]["replicas"] == 1


def test_verify_mean_plot_data(tmp_path):
    """Test the tidy plot data."""
    out, plot = tmp_path / "verify.csv", tmp_path / "plot.csv"
    argv = VERIFY_ARGS + ["--process", "iid", "--out", str(out), "--plot-data"]
    assert main(argv + [str(plot)]) == 0
    rows = read_csv(plot)
    assert rows
    assert {row["command"] for row in rows} == {"verify-mean"}


def test_truncation_check(tmp_path):
    """Test a fixed truncation level."""
    out = tmp_path / "truncation.csv"
    argv = [
        "truncation-check",
        "--process",
        "iid",
        "--alpha",
        "0.5",
        "--schedule",
        "pow:0.7",
        "--checkpoints",
        "1e3",
        "--f",
        "100",
        "--replicas",
        "5",
        "--seed",
        SEED,
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    (row,) = read_csv(out)
    assert float(row["f"]) == 100.0


def test_counterexample(tmp_path):
    """Test a small counterexample run with a fixed trimming count."""
    out = tmp_path / "tail.csv"
    argv = [
        "counterexample",
        "--gamma",
        "2",
        "--n",
        "1e3",
        "--b",
        "8",
        "--replicas",
        "50",
        "--seed",
        SEED,
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    (row,) = read_csv(out)
    assert int(row["b"]) == 8
    assert float(row["hill_index"]) > 0
    assert (tmp_path / "tail_running.csv").exists()
    assert (tmp_path / "tail_exceedance.csv").exists()
    manifest = RunManifest.read(tmp_path / "tail_manifest.json")
    assert manifest.config["process"]["gamma"] == 2.0


def test_counterexample_b_and_schedule(tmp_path):
    """Test that a count and a schedule together are rejected."""
    argv = [
        "counterexample",
        "--gamma",
        "2",
        "--n",
        "1e3",
        "--b",
        "8",
        "--schedule",
        "pow:0.5",
        "--replicas",
        "5",
        "--seed",
        SEED,
        "--out",
        str(tmp_path / "tail.csv"),
    ]
    assert main(argv) == 2


def test_mixing_iid(tmp_path):
    """Test that independent values show a small coefficient."""
    out = tmp_path / "mixing.csv"
    argv = [
        "mixing",
        "--process",
        "iid",
        "--alpha",
        "0.5",
        "--lags",
        "1..2",
        "--replicas",
        "20000",
        "--seed",
        SEED,
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    rows = read_csv(out)
    assert [int(row["lag"]) for row in rows] == [1, 2]
    assert all(float(row["psi_lower_bound"]) <= 0.25 for row in rows)
    assert "# min_mixing_lag=1" in out.read_text()


def test_mixing_doubling(tmp_path):
    """Test one row per lag and the exact values in the summary."""
    out = tmp_path / "mixing.csv"
    argv = [
        "mixing",
        "--process",
        "doubling-pareto",
        "--gamma",
        "2",
        "--lags",
        "1..4",
        "--replicas",
        "5000",
        "--seed",
        SEED,
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    assert len(read_csv(out)) == 4
    summary = json.loads((tmp_path / "mixing_summary.json").read_text())
    assert [item["lag"] for item in summary["metrics"]["exact"]] == [1, 2, 3, 4]
    assert summary["config"]["replicas"] == 5000


def test_mixing_needs_alpha(tmp_path):
    """Test that the i.i.d. process needs a tail index."""
    argv = ["mixing", "--process", "iid", "--lags", "1", "--seed", SEED]
    assert main(argv + ["--out", str(tmp_path / "mixing.csv")]) == 2


def test_validate_builtin_map(tmp_path):
    """Test that the built-in map passes."""
    out = tmp_path / "checks.csv"
    argv = ["validate-map", "--alpha", "0.5", "--prefix", "16", "--out", str(out)]
    assert main(argv) == 0
    assert {row["status"] for row in read_csv(out)} == {"pass"}


def test_validate_map_file_fails(tmp_path):
    """Test that a map failing a check gives exit code 1."""
    cells = list(canonical_luroth_map(prefix=16).cells)
    weak = cells[-1]
    cells[-1] = Cell(left=weak.left, right=weak.right, slope=0.5, label=weak.label)
    mutant = PiecewiseMapSpec(cells=cells, harmonic_tail=True)
    map_file = tmp_path / "mutant.json"
    map_file.write_text(
        json.dumps(
            {
                "map": json.loads(mutant.json()),
                "observable": json.loads(canonical_observable(mutant, 0.5).json()),
            }
        )
    )
    out = tmp_path / "checks.csv"
    argv = ["validate-map", "--map-file", str(map_file), "--out", str(out)]
    assert main(argv) == 1
    failed = [row["name"] for row in read_csv(out) if row["status"] == "fail"]
    assert failed == ["uniform_expansion"]


def test_validate_malformed_map_file(tmp_path):
    """Test that a malformed map file is a configuration error."""
    map_file = tmp_path / "bad.json"
    map_file.write_text(json.dumps({"map": {"cells": []}, "observable": {}}))
    argv = ["validate-map", "--map-file", str(map_file)]
    assert main(argv + ["--out", str(tmp_path / "checks.csv")]) == 2


def test_sample_path(tmp_path):
    """Test that the dump holds the path of the requested replica."""
    out = tmp_path / "path.txt"
    argv = [
        "sample-path",
        "--process",
        "luroth",
        "--alpha",
        "0.5",
        "--n",
        "100",
        "--replica",
        "3",
        "--seed",
        SEED,
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    expected = sample_path(LurothStep(alpha=0.5), 100, int(SEED), replica_key(3))
    np.testing.assert_array_equal(read_path(out).values, expected.values)


@pytest.mark.parametrize("workers", ["0", "-1"])
def test_invalid_workers(tmp_path, workers):
    """Test that a non-positive worker count is rejected."""
    argv = VERIFY_ARGS + ["--process", "iid", "--workers", workers]
    assert main(argv + ["--out", str(tmp_path / "verify.csv")]) == 2
