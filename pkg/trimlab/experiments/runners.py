"""Monte Carlo runners.

Replica `i` draws its path from stream `(master_seed, i)` and reduces it to
trimmed and truncated sums at every checkpoint. Per-replica sums are
aggregated in replica order, so reports do not depend on the number of
workers.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from trimlab.exceptions import DomainError, ExperimentInterrupted
from trimlab.experiments.models import (
    CheckpointMetrics,
    ConvergenceReport,
    ExceedanceRow,
    ExperimentConfig,
    TailReport,
    TruncationReport,
    TruncationRow,
)
from trimlab.experiments.tail_index import (
    default_k,
    hill_bootstrap_ci,
    hill_estimator,
    exceedance_minorant,
)
from trimlab.experiments.workers import map_ordered
from trimlab.norming.sequences import (
    d_norming,
    expected_truncated_sum,
    g_threshold,
    truncation_asymptotic,
)
from trimlab.processes.generators import sample_path
from trimlab.processes.models import (
    DoublingPareto,
    IidRegVarying,
    LurothStep,
    ProcessSpec,
)
from trimlab.regvar.calculus import TailLaw
from trimlab.regvar.models import RegVaryingTail
from trimlab.trimming.accumulator import run_plan
from trimlab.trimming.models import CheckpointPlan
from trimlab.utils.seeds import replica_key

logger = logging.getLogger(__name__)

ReplicaTask = Tuple[ProcessSpec, int, int, CheckpointPlan]


def replica_sums(task: ReplicaTask) -> np.ndarray:
    """Return trimmed and truncated sums of one replica.

    Args:
        task: Process, master seed, replica index and checkpoint plan.

    Returns:
        Array of shape `(checkpoints, 2)` holding the trimmed and the
        truncated sum per checkpoint.
    """
    spec, seed, replica, plan = task
    path = sample_path(spec, plan.max_n, seed, replica_key(replica), replica)
    rows = run_plan(path, plan)
    return np.array([[row.trimmed, row.truncated] for row in rows], dtype=float)


def _collect(
    cfg: ExperimentConfig,
    plan: CheckpointPlan,
    workers: int,
    progress: bool,
    desc: str,
) -> Tuple[np.ndarray, bool]:
    """Run all replicas; return stacked sums and whether the run completed.

    On interruption the replicas completed so far are returned.
    """
    tasks = [
        (cfg.process, cfg.master_seed, replica, plan)
        for replica in range(cfg.replicas)
    ]
    logger.info(
        f"Running {cfg.replicas} replicas of '{cfg.process.kind}' up to "
        f"n={plan.max_n} on {workers} worker(s)."
    )
    try:
        results = map_ordered(
            replica_sums, tasks, workers=workers, progress=progress, desc=desc
        )
        complete = True
    except ExperimentInterrupted as exc:
        results = exc.report or []
        complete = False
    if not results:
        return np.empty((0, len(plan.checkpoints), 2)), complete
    return np.stack(results), complete


def _standard_error(values: np.ndarray) -> Optional[float]:
    """Standard error of a sample mean; `None` for fewer than two values."""
    if values.size < 2:
        return None
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def _binomial_se(frequency: float, size: int) -> float:
    return math.sqrt(frequency * (1 - frequency) / size)


def _checked_law(spec: ProcessSpec) -> TailLaw:
    """Marginal law of a process with an exactly known tail."""
    if not isinstance(spec, (IidRegVarying, LurothStep)):
        raise DomainError(
            f"process '{spec.kind}' has no exactly known norming; use 'iid' or "
            "'luroth'"
        )
    return spec.marginal_law()


def _plan_with_thresholds(
    cfg: ExperimentConfig,
    law: TailLaw,
) -> Tuple[CheckpointPlan, List[int], List[float]]:
    """Checkpoint plan with `b_n` and truncation levels per checkpoint."""
    counts = cfg.schedule.check_grid(cfg.checkpoints)
    if cfg.truncation_level is not None:
        levels = [cfg.truncation_level] * len(counts)
    else:
        levels = [g_threshold(law, n, b) for n, b in zip(cfg.checkpoints, counts)]
    plan = CheckpointPlan.from_tuples(list(zip(cfg.checkpoints, counts, levels)))
    return plan, counts, levels


def _exact_truncated(law: TailLaw, n: int, f: float) -> Tuple[float, float]:
    """Exact and asymptotic expectation of the sum truncated at `f`."""
    if isinstance(law, RegVaryingTail) and f < law.support_left:
        return 0.0, truncation_asymptotic(law, n, f)
    moment = expected_truncated_sum(law, n, f)
    return moment.exact, moment.asymptotic


def run_mean_convergence(
    cfg: ExperimentConfig,
    workers: int = 1,
    progress: bool = False,
) -> ConvergenceReport:
    """Check mean convergence of normed trimmed sums.

    For each checkpoint `n` the trimmed sum `S` with `b_n` largest values
    removed is divided by the norming constant `d_n`; the report gives the
    mean absolute error, the mean ratio and deviation frequencies with
    standard errors, together with the ratio of `S` to the sum `T` truncated
    at the quantile threshold and of `T` to its exact expectation.

    Args:
        cfg: Experiment configuration with an `iid` or `luroth` process.
        workers: Number of worker processes.
        progress: Show a progress bar.

    Returns:
        Convergence report.

    Raises:
        trimlab.exceptions.DomainError: The process has no exactly known
            norming or `M < 2`.
        trimlab.exceptions.ScheduleError: The schedule is not admissible on
            the checkpoints.
        trimlab.exceptions.ExperimentInterrupted: The run was interrupted;
            `report` holds the metrics of the completed replicas.
    """
    law = _checked_law(cfg.process)
    if cfg.replicas < 2:
        raise DomainError("mean convergence needs at least 2 replicas")
    norming = cfg.process.norming_law()
    plan, counts, levels = _plan_with_thresholds(cfg, law)
    norms = [d_norming(norming, n, b) for n, b in zip(cfg.checkpoints, counts)]
    expected = [
        expected_truncated_sum(law, n, g).exact for n, g in zip(cfg.checkpoints, levels)
    ]
    sums, complete = _collect(cfg, plan, workers, progress, "mean convergence")
    report = _convergence_report(cfg, counts, levels, norms, expected, sums)
    if not complete:
        raise ExperimentInterrupted(
            f"mean convergence interrupted after {report.replicas} replicas",
            report=report.copy(update={"partial": True}),
        )
    return report


def _mean_ratio_over_positive(
    numerator: np.ndarray, denominator: np.ndarray, n: int
) -> float:
    """Mean of `numerator / denominator` over replicas with a positive denominator."""
    positive = denominator > 0
    excluded = int(np.count_nonzero(~positive))
    if excluded:
        logger.warning(
            f"Left out {excluded} replicas with a zero truncated sum at n={n}."
        )
    if excluded == denominator.size:
        return math.nan
    return float(np.mean(numerator[positive] / denominator[positive]))


def _convergence_report(
    cfg: ExperimentConfig,
    counts: Sequence[int],
    levels: Sequence[float],
    norms: Sequence[float],
    expected: Sequence[float],
    sums: np.ndarray,
) -> ConvergenceReport:
    """Aggregate per-replica sums into convergence metrics."""
    size = sums.shape[0]
    rows = []
    if size:
        for j, n in enumerate(cfg.checkpoints):
            trimmed, truncated = sums[:, j, 0], sums[:, j, 1]
            ratio = trimmed / norms[j]
            error = np.abs(ratio - 1)
            dev_prob = [float(np.mean(error > eps)) for eps in cfg.epsilon_grid]
            trimmed_over_truncated = _mean_ratio_over_positive(trimmed, truncated, n)
            truncated_ratio = (
                float(np.mean(truncated)) / expected[j] if expected[j] > 0 else math.nan
            )
            rows.append(
                CheckpointMetrics(
                    n=n,
                    b=counts[j],
                    d=norms[j],
                    g=levels[j],
                    mean_abs_error=float(np.mean(error)),
                    mean_abs_error_se=_standard_error(error),
                    mean_ratio=float(np.mean(ratio)),
                    mean_ratio_se=_standard_error(ratio),
                    dev_prob=dev_prob,
                    dev_prob_se=[_binomial_se(p, size) for p in dev_prob],
                    mean_trimmed_over_truncated=trimmed_over_truncated,
                    mean_truncated_ratio=truncated_ratio,
                )
            )
    return ConvergenceReport(rows=rows, epsilon_grid=cfg.epsilon_grid, replicas=size)


def run_counterexample(
    cfg: ExperimentConfig,
    workers: int = 1,
    progress: bool = False,
) -> TailReport:
    """Exhibit the infinite mean of trimmed sums along doubling-map orbits.

    Draws `M` trimmed sums at the single checkpoint `n`, estimates their tail
    index with the Hill estimator and a bootstrap interval, records running
    means over growing replica counts and compares exceedance frequencies of
    the thresholds `(omega 2^-b) ** -gamma` against `omega`. The divergence
    flag is set when the Hill index is below 1 with an interval excluding 1.

    Args:
        cfg: Experiment configuration with a `doubling_pareto` process and a
            single checkpoint.
        workers: Number of worker processes.
        progress: Show a progress bar.

    Returns:
        Tail report.

    Raises:
        trimlab.exceptions.DomainError: Wrong process, more than one
            checkpoint or `M < 3`.
        trimlab.exceptions.PrecisionOverflowError: A point needed more bits
            than `max_window_bits`.
        trimlab.exceptions.ExperimentInterrupted: The run was interrupted.
    """
    spec = cfg.process
    if not isinstance(spec, DoublingPareto):
        raise DomainError("the counterexample needs a 'doubling_pareto' process")
    if len(cfg.checkpoints) != 1:
        raise DomainError("the counterexample runs at a single checkpoint n")
    if cfg.replicas < 3:
        raise DomainError("the counterexample needs at least 3 replicas")
    n = cfg.checkpoints[0]
    (b,) = cfg.schedule.check_grid(cfg.checkpoints)
    plan = CheckpointPlan.from_tuples([(n, b, math.inf)])
    sums, complete = _collect(cfg, plan, workers, progress, "counterexample")
    report = _tail_report(cfg, spec, n, b, sums[:, 0, 0])
    if not complete:
        raise ExperimentInterrupted(
            f"counterexample interrupted after {sums.shape[0]} replicas",
            report=report,
        )
    return report


def _tail_report(
    cfg: ExperimentConfig,
    spec: DoublingPareto,
    n: int,
    b: int,
    trimmed: np.ndarray,
) -> Optional[TailReport]:
    """Aggregate trimmed sums into tail diagnostics."""
    size = trimmed.size
    if size < 3:
        return None
    k = cfg.hill_k if cfg.hill_k is not None else default_k(size, cfg.hill_exponent)
    k = min(k, size - 1)
    hill = hill_estimator(trimmed, k)
    low, high = hill_bootstrap_ci(
        trimmed,
        k,
        resamples=cfg.bootstrap_resamples,
        confidence=cfg.confidence,
        seed=cfg.master_seed,
    )
    cumulative = np.cumsum(trimmed)
    running = [
        (count, float(cumulative[count - 1] / count))
        for count in cfg.replica_counts()
        if count <= size
    ]
    exceedances = []
    for omega in cfg.omega_grid:
        threshold, minorant = exceedance_minorant(spec.gamma, b, omega)
        frequency = float(np.mean(trimmed >= threshold))
        exceedances.append(
            ExceedanceRow(
                omega=omega,
                threshold=threshold,
                frequency=frequency,
                standard_error=_binomial_se(frequency, size),
                minorant=minorant,
            )
        )
    flag = hill < 1 and high < 1
    logger.info(
        f"Hill index {hill:.4g} in [{low:.4g}, {high:.4g}] from k={k}; "
        f"divergence flag {flag}."
    )
    return TailReport(
        n=n,
        b=b,
        replicas=size,
        hill_k=k,
        hill_index=hill,
        hill_ci=(low, high),
        running_means=running,
        divergence_flag=flag,
        exceedances=exceedances,
        partial=size < cfg.replicas,
    )


def run_truncation_check(
    cfg: ExperimentConfig,
    workers: int = 1,
    progress: bool = False,
) -> TruncationReport:
    """Compare empirical truncated sums with their exact expectation.

    The truncation level is `cfg.truncation_level` or, if not given, the
    quantile threshold `g_n` of each checkpoint. Each row also reports the
    mean of `S/d` with `S` the trimmed sum.

    Args:
        cfg: Experiment configuration with an `iid` or `luroth` process.
        workers: Number of worker processes.
        progress: Show a progress bar.

    Returns:
        Truncation report; standard errors are `None` for one replica.

    Raises:
        trimlab.exceptions.DomainError: The process has no exactly known
            tail.
        trimlab.exceptions.ExperimentInterrupted: The run was interrupted.
    """
    law = _checked_law(cfg.process)
    norming = cfg.process.norming_law()
    plan, counts, levels = _plan_with_thresholds(cfg, law)
    sums, complete = _collect(cfg, plan, workers, progress, "truncation check")
    size = sums.shape[0]
    if size == 1:
        logger.warning("Standard errors are undefined for a single replica.")
    rows = []
    for j, n in enumerate(cfg.checkpoints if size else []):
        b, f = counts[j], levels[j]
        exact, asymptotic = _exact_truncated(law, n, f)
        truncated = sums[:, j, 1]
        ratio = sums[:, j, 0] / d_norming(norming, n, b)
        mean = float(np.mean(truncated))
        se = _standard_error(truncated)
        rows.append(
            TruncationRow(
                n=n,
                b=b,
                f=f,
                mean_truncated=mean,
                truncated_se=se,
                expected_exact=exact,
                expected_asymptotic=asymptotic,
                z_score=(mean - exact) / se if se else None,
                mean_trimmed_over_d=float(np.mean(ratio)),
                trimmed_over_d_se=_standard_error(ratio),
            )
        )
    report = TruncationReport(rows=rows, replicas=size, partial=not complete)
    if not complete:
        raise ExperimentInterrupted(
            f"truncation check interrupted after {size} replicas", report=report
        )
    return report
