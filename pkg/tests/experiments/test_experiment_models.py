"""Unit tests for experiment configuration and report models."""

from pydantic import ValidationError
import pytest

from trimlab.experiments.models import (
    CheckpointMetrics,
    ConvergenceReport,
    ExperimentConfig,
    TailReport,
)
from trimlab.norming.models import ExplicitSchedule, PowerRule
from trimlab.processes.models import DoublingPareto, LurothStep

BASE = {
    "process": {"kind": "luroth", "alpha": 0.5},
    "schedule": {"kind": "power", "theta": 0.7},
    "checkpoints": [1000, 10000],
    "replicas": 200,
    "master_seed": 42,
}


def test_config_parses_tagged_unions():
    """Test that process and schedule kinds select their models."""
    cfg = ExperimentConfig(**BASE)
    assert isinstance(cfg.process, LurothStep)
    assert isinstance(cfg.schedule, PowerRule)
    other = ExperimentConfig(
        **{
            **BASE,
            "process": {"kind": "doubling_pareto", "gamma": 2.0},
            "schedule": {"kind": "explicit", "table": {"10000": 8}},
        }
    )
    assert isinstance(other.process, DoublingPareto)
    assert isinstance(other.schedule, ExplicitSchedule)
    assert other.schedule.b(10000) == 8


@pytest.mark.parametrize(
    "update",
    [
        {"checkpoints": [1000, 1000]},
        {"checkpoints": []},
        {"replicas": 0},
        {"master_seed": -1},
        {"epsilon_grid": [0.0, 0.5]},
        {"epsilon_grid": [1.5]},
        {"omega_grid": [2.0]},
        {"running_grid": [10, 500]},
    ],
)
def test_config_invalid(update):
    """Test that invalid configurations are rejected."""
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**BASE, **update})


def test_config_round_trip_and_hash():
    """Test that the canonical JSON reproduces the configuration."""
    cfg = ExperimentConfig(**BASE, output="out.csv")
    again = ExperimentConfig.parse_raw(cfg.canonical_json())
    assert again.canonical_json() == cfg.canonical_json()
    assert again.config_hash() == cfg.config_hash()
    assert len(cfg.config_hash()) == 40
    assert "output" not in cfg.canonical_json()


def test_config_hash_depends_on_seed():
    """Test that different seeds hash differently."""
    other = ExperimentConfig(**{**BASE, "master_seed": 43})
    assert other.config_hash() != ExperimentConfig(**BASE).config_hash()


def test_epsilon_grid_sorted():
    """Test that deviation levels are sorted and deduplicated."""
    cfg = ExperimentConfig(**{**BASE, "epsilon_grid": [0.5, 0.1, 0.5]})
    assert cfg.epsilon_grid == [0.1, 0.5]


def test_replica_counts_default():
    """Test default running-mean replica counts."""
    assert ExperimentConfig(**BASE).replica_counts() == [10, 100, 200]
    cfg = ExperimentConfig(**{**BASE, "replicas": 1000})
    assert cfg.replica_counts() == [10, 100, 1000]


def test_replica_counts_explicit():
    """Test explicit running-mean replica counts."""
    cfg = ExperimentConfig(**{**BASE, "running_grid": [100, 10]})
    assert cfg.replica_counts() == [10, 100]


def test_convergence_report_header():
    """Test that CSV rows follow the header."""
    row = CheckpointMetrics(
        n=1000,
        b=126,
        d=7936.5,
        g=81.0,
        mean_abs_error=0.2,
        mean_abs_error_se=0.01,
        mean_ratio=0.95,
        mean_ratio_se=0.02,
        dev_prob=[0.4, 0.1],
        dev_prob_se=[0.03, 0.02],
        mean_trimmed_over_truncated=1.0,
        mean_truncated_ratio=1.0,
    )
    report = ConvergenceReport(rows=[row], epsilon_grid=[0.1, 0.25], replicas=200)
    header = report.header()
    assert "dev_prob_0.25" in header
    assert "dev_prob_se_0.1" in header
    assert len(report.csv_rows()[0]) == len(header)


def test_tail_report_positive_index():
    """Test that a non-positive Hill index is rejected."""
    with pytest.raises(ValidationError):
        TailReport(
            n=100,
            b=3,
            replicas=10,
            hill_k=4,
            hill_index=0.0,
            hill_ci=(0.1, 0.9),
            running_means=[(10, 5.0)],
            divergence_flag=False,
        )
