"""Report output: CSV tables, JSON run summaries and plot data."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from trimlab.experiments.models import (
    EXCEEDANCE_CSV_HEADER,
    RUNNING_CSV_HEADER,
    TAIL_CSV_HEADER,
    TRUNCATION_CSV_HEADER,
    ConvergenceReport,
    ExperimentConfig,
    TailReport,
    TruncationReport,
)
from trimlab.utils.csv_io import write_csv

logger = logging.getLogger(__name__)

PLOT_HEADER: Tuple[str, ...] = ("command", "series", "x", "y")

PlotRow = Tuple[str, str, float, Optional[float]]


def sibling(destination: Union[str, Path], suffix: str) -> Path:
    """Return `<stem>_<suffix><ext>` next to `destination`."""
    destination = Path(destination)
    return destination.with_name(f"{destination.stem}_{suffix}{destination.suffix}")


def write_convergence_csv(
    report: ConvergenceReport,
    destination: Union[str, Path],
) -> Path:
    """Write a convergence report; interrupted runs get a partial footer."""
    return write_csv(
        destination, report.header(), report.csv_rows(), partial=report.partial
    )


def write_tail_csv(report: TailReport, destination: Union[str, Path]) -> List[Path]:
    """Write a tail report with running means and exceedances next to it.

    Returns:
        Paths of the summary, running-mean and exceedance tables.
    """
    summary = (
        report.n,
        report.b,
        report.replicas,
        report.hill_k,
        report.hill_index,
        report.hill_ci[0],
        report.hill_ci[1],
        report.divergence_flag,
    )
    return [
        write_csv(destination, TAIL_CSV_HEADER, [summary], partial=report.partial),
        write_csv(
            sibling(destination, "running"),
            RUNNING_CSV_HEADER,
            report.running_means,
            partial=report.partial,
        ),
        write_csv(
            sibling(destination, "exceedance"),
            EXCEEDANCE_CSV_HEADER,
            [
                tuple(getattr(row, column) for column in EXCEEDANCE_CSV_HEADER)
                for row in report.exceedances
            ],
            partial=report.partial,
        ),
    ]


def write_truncation_csv(
    report: TruncationReport,
    destination: Union[str, Path],
) -> Path:
    """Write a truncation report; interrupted runs get a partial footer."""
    return write_csv(
        destination, TRUNCATION_CSV_HEADER, report.csv_rows(), partial=report.partial
    )


def config_digest(config: Dict[str, Any]) -> str:
    """SHA-1 of the canonical JSON form of a configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canonical.encode("utf-8")).hexdigest()


def run_summary(
    config: Union[ExperimentConfig, Dict[str, Any]],
    metrics: Any,
    wall_time: float,
    partial: bool = False,
) -> Dict[str, Any]:
    """Return the JSON run summary.

    Args:
        config: Experiment configuration or any canonical config mapping.
        metrics: JSON-compatible metrics.
        wall_time: Wall-clock seconds.
        partial: Whether the run was interrupted.

    Returns:
        Mapping with keys `config`, `config_hash`, `metrics`, `wall_time`
        and `partial`; `config_hash` is the SHA-1 of the canonical config
        JSON.
    """
    if isinstance(config, ExperimentConfig):
        canonical = json.loads(config.canonical_json())
        digest = config.config_hash()
    else:
        canonical = config
        digest = config_digest(config)
    return {
        "config": canonical,
        "config_hash": digest,
        "metrics": metrics,
        "wall_time": wall_time,
        "partial": partial,
    }


def write_json(content: Dict[str, Any], destination: Union[str, Path]) -> Path:
    """Write a mapping as sorted, indented JSON."""
    destination = Path(destination)
    with open(destination, "w", encoding="utf-8") as _file:
        json.dump(content, _file, sort_keys=True, indent=2, allow_nan=True)
        _file.write("\n")
    logger.info(f"Wrote '{destination}'.")
    return destination


def convergence_plot_rows(report: ConvergenceReport) -> List[PlotRow]:
    """Tidy plot rows of a convergence report."""
    rows: List[PlotRow] = []
    for row in report.rows:
        rows.append(("verify-mean", "mean_abs_error", row.n, row.mean_abs_error))
        rows.append(("verify-mean", "mean_ratio", row.n, row.mean_ratio))
        for eps, prob in zip(report.epsilon_grid, row.dev_prob):
            rows.append(("verify-mean", f"dev_prob_{eps:g}", row.n, prob))
    return rows


def tail_plot_rows(report: TailReport) -> List[PlotRow]:
    """Tidy plot rows of a tail report."""
    rows: List[PlotRow] = [
        ("counterexample", "running_mean", count, mean)
        for count, mean in report.running_means
    ]
    for row in report.exceedances:
        rows.append(
            ("counterexample", "exceedance_frequency", row.omega, row.frequency)
        )
        rows.append(("counterexample", "omega", row.omega, row.omega))
    return rows


def truncation_plot_rows(report: TruncationReport) -> List[PlotRow]:
    """Tidy plot rows of a truncation report."""
    rows: List[PlotRow] = []
    for row in report.rows:
        rows.append(("truncation-check", "mean_truncated", row.n, row.mean_truncated))
        rows.append(("truncation-check", "expected_exact", row.n, row.expected_exact))
        rows.append(
            ("truncation-check", "expected_asymptotic", row.n, row.expected_asymptotic)
        )
    return rows


def write_plot_data(rows: Sequence[PlotRow], destination: Union[str, Path]) -> Path:
    """Write tidy long-format plot data."""
    return write_csv(destination, PLOT_HEADER, rows)
