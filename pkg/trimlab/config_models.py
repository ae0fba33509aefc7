"""Custom app config models."""

from typing import List

from pydantic import BaseModel, validator  # pylint: disable=no-name-in-module

# pragma pylint: disable=too-few-public-methods


class Defaults(BaseModel):
    """Model for global default parameters.

    Args:
        workers: Number of worker processes used for replica parallelism. May
            be overridden by the `TRIMLAB_WORKERS` environment variable or the
            `--workers` flag.

    Attributes:
        workers: Number of worker processes used for replica parallelism.
    """

    workers: int = 1

    @validator("workers")
    def positive(cls, value: int) -> int:  # pylint: disable=no-self-argument
        """Ensure that the worker count is positive."""
        if value < 1:
            raise ValueError("must be positive")
        return value


class RegVarDefaults(BaseModel):
    """Model for numerical tolerances of the tail calculus.

    conjugate_x_min: Smallest argument accepted by the de Bruijn conjugate
        solver.
    conjugate_max_iter: Iteration cap of the conjugate fixed-point solver.
    conjugate_tol: Relative step tolerance of the conjugate solver.
    """

    conjugate_x_min: float = 10.0
    conjugate_max_iter: int = 200
    conjugate_tol: float = 1e-12


class ProcessDefaults(BaseModel):
    """Model for process generator defaults.

    window_bits: Bits read after the first 1-bit of a doubling-map point.
    max_window_bits: Leading zeros tolerated before a precision overflow is
        raised.
    mixing_block_size: Replicas generated per stream by the batch sampler.
    """

    window_bits: int = 64
    max_window_bits: int = 512
    mixing_block_size: int = 4096


class MixingDefaults(BaseModel):
    """Model for dependence-estimation defaults.

    min_count: Count floor for every event entering a ratio estimate.
    thresholds: Default event thresholds.
    replicas: Default number of independent replicas.
    """

    min_count: int = 20
    thresholds: List[float] = [4.0, 16.0, 64.0]
    replicas: int = 100000


class ExperimentDefaults(BaseModel):
    """Model for Monte Carlo harness defaults.

    epsilon_grid: Deviation levels for the convergence-in-probability check.
    hill_exponent: The Hill estimator uses the top `ceil(M ** hill_exponent)`
        order statistics.
    bootstrap_resamples: Resamples drawn for the Hill confidence interval.
    omega_grid: Levels of the counterexample exceedance check.
    confidence: Two-sided confidence level of bootstrap intervals.
    """

    epsilon_grid: List[float] = [0.05, 0.1, 0.25, 0.5]
    hill_exponent: float = 0.6
    bootstrap_resamples: int = 500
    omega_grid: List[float] = [0.5, 0.25, 0.1, 0.05]
    confidence: float = 0.95


class CustomConfig(BaseModel):
    """Custom app configuration.

    Args:
        defaults: Global configuration parameters.
        regvar: Tolerances of the tail calculus.
        processes: Process generator defaults.
        mixing: Dependence estimation defaults.
        experiments: Monte Carlo harness defaults.

    Attributes:
        defaults: Global configuration parameters.
        regvar: Tolerances of the tail calculus.
        processes: Process generator defaults.
        mixing: Dependence estimation defaults.
        experiments: Monte Carlo harness defaults.
    """

    defaults: Defaults = Defaults()
    regvar: RegVarDefaults = RegVarDefaults()
    processes: ProcessDefaults = ProcessDefaults()
    mixing: MixingDefaults = MixingDefaults()
    experiments: ExperimentDefaults = ExperimentDefaults()
