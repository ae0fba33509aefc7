"""Experiment configuration and report models."""

import hashlib
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import (  # pylint: disable=no-name-in-module
    BaseModel,
    root_validator,
    validator,
)

from trimlab.norming.models import TrimmingSchedule
from trimlab.processes.models import ProcessSpec

# pragma pylint: disable=too-few-public-methods


def _format_level(level: float) -> str:
    return f"{level:g}"


class ExperimentConfig(BaseModel):
    """Configuration of a Monte Carlo run.

    Args:
        process: Process specification.
        schedule: Trimming schedule.
        checkpoints: Strictly increasing path lengths.
        replicas: Number of independent replicas `M`.
        master_seed: Master seed; replica `i` uses stream `(master_seed, i)`.
        epsilon_grid: Deviation levels in (0, 1] of the convergence in
            probability check.
        truncation_level: Fixed truncation level; the quantile threshold of
            each checkpoint is used when not given.
        hill_k: Upper order statistics used by the Hill estimator; defaults
            to `ceil(M ** hill_exponent)`.
        hill_exponent: Exponent of the default `hill_k`.
        bootstrap_resamples: Resamples of the Hill confidence interval.
        confidence: Two-sided confidence level.
        omega_grid: Levels of the exceedance check.
        running_grid: Replica counts of the running means; defaults to the
            powers of ten below `M`, and `M`.
        output: Output path.

    Raises:
        pydantic.ValidationError: The configuration violates the constraints.
    """

    process: ProcessSpec
    schedule: TrimmingSchedule
    checkpoints: List[int]
    replicas: int
    master_seed: int
    epsilon_grid: List[float] = [0.05, 0.1, 0.25, 0.5]
    truncation_level: Optional[float] = None
    hill_k: Optional[int] = None
    hill_exponent: float = 0.6
    bootstrap_resamples: int = 500
    confidence: float = 0.95
    omega_grid: List[float] = [0.5, 0.25, 0.1, 0.05]
    running_grid: Optional[List[int]] = None
    output: Optional[Path] = None

    class Config:
        """Model configuration."""

        allow_mutation = False

    @validator("checkpoints")
    def checkpoints_increasing(  # pylint: disable=no-self-argument
        cls,
        value: List[int],
    ) -> List[int]:
        """Ensure that checkpoints are positive and strictly increasing."""
        if not value:
            raise ValueError("at least one checkpoint is required")
        if value[0] < 1 or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("checkpoints must be positive and strictly increasing")
        return value

    @validator("replicas")
    def replicas_positive(cls, value: int) -> int:  # pylint: disable=no-self-argument
        """Ensure that at least one replica is run."""
        if value < 1:
            raise ValueError("replicas must be at least 1")
        return value

    @validator("master_seed")
    def seed_non_negative(cls, value: int) -> int:  # pylint: disable=no-self-argument
        """Ensure that the seed is non-negative."""
        if value < 0:
            raise ValueError("seed must be non-negative")
        return value

    @validator("epsilon_grid")
    def epsilon_in_unit_interval(  # pylint: disable=no-self-argument
        cls,
        value: List[float],
    ) -> List[float]:
        """Ensure that deviation levels lie in (0, 1] and sort them."""
        if any(not 0 < eps <= 1 for eps in value):
            raise ValueError("epsilon_grid must lie in (0,1]")
        return sorted(set(value))

    @validator("omega_grid")
    def omega_in_unit_interval(  # pylint: disable=no-self-argument
        cls,
        value: List[float],
    ) -> List[float]:
        """Ensure that exceedance levels lie in (0, 1]."""
        if any(not 0 < omega <= 1 for omega in value):
            raise ValueError("omega_grid must lie in (0,1]")
        return value

    @root_validator(skip_on_failure=True)
    def running_grid_within_replicas(cls, values):  # pylint: disable=no-self-argument
        """Ensure that running-mean replica counts do not exceed `M`."""
        grid = values.get("running_grid")
        if grid is not None:
            if any(not 1 <= m <= values["replicas"] for m in grid):
                raise ValueError("running_grid entries must lie in [1, replicas]")
            values["running_grid"] = sorted(set(grid))
        return values

    def canonical_json(self) -> str:
        """Canonical JSON representation; output paths are excluded."""
        return self.json(
            exclude={"output"}, sort_keys=True, separators=(",", ":")
        )

    def config_hash(self) -> str:
        """SHA-1 of the canonical JSON representation."""
        return hashlib.sha1(self.canonical_json().encode("utf-8")).hexdigest()

    def replica_counts(self) -> List[int]:
        """Replica counts of the running means."""
        if self.running_grid is not None:
            return list(self.running_grid)
        grid = []
        power = 10
        while power < self.replicas:
            grid.append(power)
            power *= 10
        return grid + [self.replicas]


class CheckpointMetrics(BaseModel):
    """Convergence metrics of `S/d` at one checkpoint.

    Args:
        n: Checkpoint.
        b: Trimming count.
        d: Norming constant.
        g: Quantile threshold used for the truncated sums.
        mean_abs_error: Mean of `|S/d - 1|`.
        mean_abs_error_se: Standard error of `mean_abs_error`.
        mean_ratio: Mean of `S/d`.
        mean_ratio_se: Standard error of `mean_ratio`.
        dev_prob: Frequencies of `|S/d - 1| > eps`, one per deviation level.
        dev_prob_se: Binomial standard errors of `dev_prob`.
        mean_trimmed_over_truncated: Mean of `S / T`, with `T` the sum
            truncated at `g`, over replicas with `T > 0`; nan if there are
            none.
        mean_truncated_ratio: Mean of `T` over its exact expectation.
    """

    n: int
    b: int
    d: float
    g: float
    mean_abs_error: float
    mean_abs_error_se: Optional[float]
    mean_ratio: float
    mean_ratio_se: Optional[float]
    dev_prob: List[float]
    dev_prob_se: List[float]
    mean_trimmed_over_truncated: float
    mean_truncated_ratio: float


class ConvergenceReport(BaseModel):
    """Mean-convergence metrics along a checkpoint grid.

    Args:
        rows: Metrics per checkpoint.
        epsilon_grid: Deviation levels of `dev_prob`.
        replicas: Number of replicas aggregated.
        partial: Whether the run was interrupted.
    """

    rows: List[CheckpointMetrics] = []
    epsilon_grid: List[float]
    replicas: int
    partial: bool = False

    def header(self) -> Tuple[str, ...]:
        """CSV column names."""
        levels = [_format_level(eps) for eps in self.epsilon_grid]
        return (
            ("n", "b", "d", "g", "mean_abs_error", "mean_abs_error_se")
            + ("mean_ratio", "mean_ratio_se")
            + tuple(f"dev_prob_{level}" for level in levels)
            + tuple(f"dev_prob_se_{level}" for level in levels)
            + ("mean_trimmed_over_truncated", "mean_truncated_ratio")
        )

    def csv_rows(self) -> List[tuple]:
        """CSV rows matching `header()`."""
        return [
            (
                row.n,
                row.b,
                row.d,
                row.g,
                row.mean_abs_error,
                row.mean_abs_error_se,
                row.mean_ratio,
                row.mean_ratio_se,
                *row.dev_prob,
                *row.dev_prob_se,
                row.mean_trimmed_over_truncated,
                row.mean_truncated_ratio,
            )
            for row in self.rows
        ]


class ExceedanceRow(BaseModel):
    """Exceedance frequency of one threshold.

    Args:
        omega: Level.
        threshold: `(omega 2^-b) ** -gamma`.
        frequency: Fraction of replicas whose trimmed sum reaches the
            threshold.
        standard_error: Binomial standard error of `frequency`.
        minorant: Closed-form lower bound `omega ** (1 - gamma) 2^-b` of the
            mean.
    """

    omega: float
    threshold: float
    frequency: float
    standard_error: Optional[float]
    minorant: float


class TailReport(BaseModel):
    """Tail diagnostics of trimmed sums with infinite mean.

    Args:
        n: Path length.
        b: Trimming count.
        replicas: Number of replicas.
        hill_k: Upper order statistics used.
        hill_index: Hill estimate of the tail index of the trimmed sums.
        hill_ci: Bootstrap confidence interval of `hill_index`.
        running_means: Pairs of replica count and sample mean over the first
            replicas.
        divergence_flag: Hill index below 1 with an interval excluding 1.
        exceedances: Exceedance frequencies.
        partial: Whether the run was interrupted.
    """

    n: int
    b: int
    replicas: int
    hill_k: int
    hill_index: float
    hill_ci: Tuple[float, float]
    running_means: List[Tuple[int, float]]
    divergence_flag: bool
    exceedances: List[ExceedanceRow] = []
    partial: bool = False

    @validator("hill_index")
    def hill_index_positive(  # pylint: disable=no-self-argument
        cls,
        value: float,
    ) -> float:
        """Ensure that the Hill index is positive."""
        if not value > 0:
            raise ValueError("hill_index must be positive")
        return value


TAIL_CSV_HEADER: Tuple[str, ...] = (
    "n",
    "b",
    "replicas",
    "hill_k",
    "hill_index",
    "hill_ci_low",
    "hill_ci_high",
    "divergence_flag",
)
RUNNING_CSV_HEADER: Tuple[str, ...] = ("replicas", "running_mean")
EXCEEDANCE_CSV_HEADER: Tuple[str, ...] = (
    "omega",
    "threshold",
    "frequency",
    "standard_error",
    "minorant",
)


class TruncationRow(BaseModel):
    """Empirical against exact truncated sums at one checkpoint.

    Args:
        n: Checkpoint.
        b: Trimming count.
        f: Truncation level.
        mean_truncated: Mean truncated sum across replicas.
        truncated_se: Standard error of `mean_truncated`; `None` for one
            replica.
        expected_exact: Exact expectation of the truncated sum.
        expected_asymptotic: Asymptotic expectation of the truncated sum.
        z_score: `(mean_truncated - expected_exact) / truncated_se`.
        mean_trimmed_over_d: Mean of `S/d`.
        trimmed_over_d_se: Standard error of `mean_trimmed_over_d`.
    """

    n: int
    b: int
    f: float
    mean_truncated: float
    truncated_se: Optional[float]
    expected_exact: float
    expected_asymptotic: float
    z_score: Optional[float]
    mean_trimmed_over_d: float
    trimmed_over_d_se: Optional[float]

    @property
    def se_defined(self) -> bool:
        """Whether standard errors are defined."""
        return self.truncated_se is not None


TRUNCATION_CSV_HEADER: Tuple[str, ...] = (
    "n",
    "b",
    "f",
    "mean_truncated",
    "truncated_se",
    "expected_exact",
    "expected_asymptotic",
    "z_score",
    "mean_trimmed_over_d",
    "trimmed_over_d_se",
)


class TruncationReport(BaseModel):
    """Truncated-sum check along a checkpoint grid.

    Args:
        rows: One row per checkpoint.
        replicas: Number of replicas aggregated.
        partial: Whether the run was interrupted.
    """

    rows: List[TruncationRow] = []
    replicas: int
    partial: bool = False

    def csv_rows(self) -> List[tuple]:
        """CSV rows matching `TRUNCATION_CSV_HEADER`."""
        return [
            tuple(getattr(row, column) for column in TRUNCATION_CSV_HEADER)
            for row in self.rows
        ]
