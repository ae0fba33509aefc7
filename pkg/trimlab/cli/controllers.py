"""Controllers for the trimlab commands.

Every controller takes the parsed arguments and the application configuration
and returns the exit code. Options that were not given are filled from the
`custom` section of the configuration before the run, so the manifest written
next to the outputs records every value the run depended on.
"""

import argparse
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from trimlab.app import AppConfig
from trimlab.cli.models import RunManifest
from trimlab.exceptions import ConfigError, ExperimentInterrupted
from trimlab.experiments.models import (
    ConvergenceReport,
    ExperimentConfig,
    TailReport,
    TruncationReport,
)
from trimlab.experiments.reports import (
    config_digest,
    convergence_plot_rows,
    run_summary,
    sibling,
    tail_plot_rows,
    truncation_plot_rows,
    write_convergence_csv,
    write_json,
    write_plot_data,
    write_tail_csv,
    write_truncation_csv,
)
from trimlab.experiments.runners import (
    run_counterexample,
    run_mean_convergence,
    run_truncation_check,
)
from trimlab.mixing import models as mixing_models
from trimlab.mixing.estimators import (
    MAX_DYADIC_LAG,
    exact_dyadic_psi,
    min_mixing_lag,
    psi_profile,
)
from trimlab.norming import models as norming_models
from trimlab.norming.sequences import norming_table
from trimlab.processes.diagnostics import LEVEL_MAX, validate_example_conditions
from trimlab.processes.dump import write_path
from trimlab.processes.generators import sample_path
from trimlab.processes.maps import (
    DEFAULT_PREFIX,
    canonical_luroth_map,
    canonical_observable,
)
from trimlab.processes.models import (
    DoublingPareto,
    IidRegVarying,
    LurothStep,
    PiecewiseMapSpec,
    ProcessSpec,
    StepObservable,
)
from trimlab.regvar.models import RegVaryingTail, parse_slowly_varying
from trimlab.utils.csv_io import write_csv
from trimlab.utils.seeds import replica_key
from trimlab.version import __version__

logger = logging.getLogger(__name__)

DEFAULT_L = "const:1"
DEFAULT_COUNTEREXAMPLE_SCHEDULE = "pow:0.5"
DEFAULT_K_BOUND = 4.0
CHECK_CSV_HEADER = ("name", "status", "witness")

# options that never enter a manifest
TRANSIENT = frozenset(
    {"config", "workers", "progress", "verbose", "handler", "required", "command"}
)


def manifest_arguments(args: argparse.Namespace) -> Dict[str, Any]:
    """Resolved arguments of a run, as stored in its manifest."""
    arguments = {}
    for key, value in sorted(vars(args).items()):
        if key in TRANSIENT or value is None:
            continue
        arguments[key] = str(value) if isinstance(value, Path) else value
    return arguments


def _fill(args: argparse.Namespace, name: str, value: Any) -> Any:
    """Set `args.<name>` to `value` unless given; return the resolved value."""
    if getattr(args, name, None) is None:
        setattr(args, name, value)
    return getattr(args, name)


def _workers(args: argparse.Namespace, config: AppConfig) -> int:
    """Worker count from the command line or the configuration."""
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        return args.workers
    return config.custom.defaults.workers


def _output(args: argparse.Namespace, suffix: str = ".csv") -> Path:
    """Resolve the output file; defaults to `<command><suffix>`."""
    return Path(_fill(args, "out", Path(f"{args.command}{suffix}")))


def _alpha(args: argparse.Namespace) -> float:
    if args.alpha is None:
        raise ConfigError("--alpha is required")
    if not 0 < args.alpha < 1:
        raise ConfigError("alpha must be in (0,1)")
    return args.alpha


def _tail(args: argparse.Namespace) -> RegVaryingTail:
    """Regularly varying tail from `--alpha` and `--L`."""
    alpha = _alpha(args)
    try:
        L = parse_slowly_varying(_fill(args, "L", DEFAULT_L))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RegVaryingTail.natural(alpha, L)


def _schedule(text: str) -> norming_models.TrimmingSchedule:
    try:
        return norming_models.parse_schedule(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _process(args: argparse.Namespace, config: AppConfig) -> ProcessSpec:
    """Build the process specification named by `--process`."""
    if args.process == "iid":
        return IidRegVarying(tail=_tail(args))
    if args.process == "luroth":
        return LurothStep(alpha=_alpha(args))
    if args.process == "doubling-pareto":
        if args.gamma is None:
            raise ConfigError("--gamma is required for 'doubling-pareto'")
        return _doubling(args, config)
    raise ConfigError(f"unknown process: {args.process}")


def _doubling(args: argparse.Namespace, config: AppConfig) -> DoublingPareto:
    defaults = config.custom.processes
    return DoublingPareto(
        gamma=args.gamma,
        window_bits=_fill(args, "window_bits", defaults.window_bits),
        max_window_bits=_fill(args, "max_window_bits", defaults.max_window_bits),
    )


def _write_plot_data(args: argparse.Namespace, rows: List[tuple]) -> List[Path]:
    if args.plot_data is None:
        return []
    return [write_plot_data(rows, args.plot_data)]


def _write_manifest(
    args: argparse.Namespace,
    outputs: List[Path],
    config: Optional[Dict[str, Any]] = None,
    master_seed: Optional[int] = None,
) -> Path:
    """Write the run manifest next to the main output."""
    destination = sibling(outputs[0], "manifest").with_suffix(".json")
    manifest = RunManifest(
        command=args.command,
        arguments=manifest_arguments(args),
        config=config,
        config_hash=config_digest(config) if config is not None else None,
        version=__version__,
        master_seed=master_seed,
        outputs=[str(path) for path in outputs],
    )
    manifest.write(destination)
    logger.info(f"Wrote manifest '{destination}'.")
    return destination


def _metrics(model: Any) -> Any:
    """JSON-compatible form of a pydantic report."""
    return json.loads(model.json()) if model is not None else None


def cmd_norming_table(args: argparse.Namespace, config: AppConfig) -> int:
    """Tabulate `b_n`, `zeta_n`, `g_n` and `d_n` along a checkpoint grid.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code.
    """
    law = _tail(args)
    schedule = _schedule(args.schedule)
    schedule.check_grid(args.checkpoints)
    regvar = config.custom.regvar
    table = norming_table(
        law,
        schedule,
        args.checkpoints,
        x_min=regvar.conjugate_x_min,
        max_iter=regvar.conjugate_max_iter,
        tol=regvar.conjugate_tol,
    )
    out = _output(args)
    outputs = [
        write_csv(
            out, norming_models.CSV_HEADER, [row.csv_row() for row in table.rows]
        )
    ]
    plot_rows = []
    for row in table.rows:
        for series in ("d", "g", "ratio_dg_over_ab", "truncation_asymptotic"):
            plot_rows.append(("norming-table", series, row.n, getattr(row, series)))
    outputs += _write_plot_data(args, plot_rows)
    canonical = {
        "tail": json.loads(law.json(sort_keys=True)),
        "schedule": schedule.spec_string(),
        "checkpoints": list(args.checkpoints),
    }
    _write_manifest(args, outputs, config=canonical)
    return 0


def _experiment(
    args: argparse.Namespace,
    process: ProcessSpec,
    schedule: str,
    checkpoints: Sequence[int],
    **extra: Any,
) -> ExperimentConfig:
    """Build the experiment configuration of a Monte Carlo command."""
    return ExperimentConfig(
        process=process,
        schedule=_schedule(schedule),
        checkpoints=list(checkpoints),
        replicas=args.replicas,
        master_seed=args.seed,
        output=_output(args),
        **extra,
    )


def _finish(
    args: argparse.Namespace,
    cfg: ExperimentConfig,
    outputs: List[Path],
    metrics: Any,
    started: float,
    partial: bool,
) -> None:
    """Write the run summary and the manifest."""
    summary = write_json(
        run_summary(cfg, metrics, time.perf_counter() - started, partial),
        sibling(outputs[0], "summary").with_suffix(".json"),
    )
    _write_manifest(
        args,
        outputs + [summary],
        config=json.loads(cfg.canonical_json()),
        master_seed=cfg.master_seed,
    )


def cmd_verify_mean(args: argparse.Namespace, config: AppConfig) -> int:
    """Run the mean-convergence experiment.

    Partial results are written before an interruption is re-raised.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code.
    """
    process = _process(args, config)
    cfg = _experiment(
        args,
        process,
        args.schedule,
        args.checkpoints,
        epsilon_grid=_fill(
            args, "epsilon_grid", config.custom.experiments.epsilon_grid
        ),
    )
    started = time.perf_counter()
    try:
        report = run_mean_convergence(cfg, _workers(args, config), args.progress)
    except ExperimentInterrupted as exc:
        if exc.report is not None:
            _write_convergence(args, cfg, exc.report, started)
        raise
    _write_convergence(args, cfg, report, started)
    return 0


def _write_convergence(
    args: argparse.Namespace,
    cfg: ExperimentConfig,
    report: ConvergenceReport,
    started: float,
) -> None:
    outputs = [write_convergence_csv(report, cfg.output)]
    outputs += _write_plot_data(args, convergence_plot_rows(report))
    _finish(args, cfg, outputs, _metrics(report), started, report.partial)


def cmd_counterexample(args: argparse.Namespace, config: AppConfig) -> int:
    """Run the counterexample along doubling-map orbits.

    `--b` fixes the trimming count at `--n`; otherwise `--schedule` (default
    `pow:0.5`) gives it.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code.
    """
    if args.b is not None and args.schedule is not None:
        raise ConfigError("give either --b or --schedule, not both")
    schedule = (
        f"explicit:{args.n}={args.b}"
        if args.b is not None
        else _fill(args, "schedule", DEFAULT_COUNTEREXAMPLE_SCHEDULE)
    )
    defaults = config.custom.experiments
    cfg = _experiment(
        args,
        _doubling(args, config),
        schedule,
        [args.n],
        hill_k=args.hill_k,
        hill_exponent=defaults.hill_exponent,
        bootstrap_resamples=defaults.bootstrap_resamples,
        confidence=defaults.confidence,
        omega_grid=_fill(args, "omega_grid", defaults.omega_grid),
    )
    started = time.perf_counter()
    try:
        report = run_counterexample(cfg, _workers(args, config), args.progress)
    except ExperimentInterrupted as exc:
        if exc.report is not None:
            _write_tail(args, cfg, exc.report, started)
        raise
    _write_tail(args, cfg, report, started)
    return 0


def _write_tail(
    args: argparse.Namespace,
    cfg: ExperimentConfig,
    report: TailReport,
    started: float,
) -> None:
    outputs = write_tail_csv(report, cfg.output)
    outputs += _write_plot_data(args, tail_plot_rows(report))
    _finish(args, cfg, outputs, _metrics(report), started, report.partial)


def cmd_truncation_check(args: argparse.Namespace, config: AppConfig) -> int:
    """Compare truncated sums with their exact expectation.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code.
    """
    process = _process(args, config)
    cfg = _experiment(
        args, process, args.schedule, args.checkpoints, truncation_level=args.f
    )
    started = time.perf_counter()
    try:
        report = run_truncation_check(cfg, _workers(args, config), args.progress)
    except ExperimentInterrupted as exc:
        if exc.report is not None:
            _write_truncation(args, cfg, exc.report, started)
        raise
    _write_truncation(args, cfg, report, started)
    return 0


def _write_truncation(
    args: argparse.Namespace,
    cfg: ExperimentConfig,
    report: TruncationReport,
    started: float,
) -> None:
    outputs = [write_truncation_csv(report, cfg.output)]
    outputs += _write_plot_data(args, truncation_plot_rows(report))
    _finish(args, cfg, outputs, _metrics(report), started, report.partial)


def cmd_mixing(args: argparse.Namespace, config: AppConfig) -> int:
    """Estimate the dependence coefficient over a range of lags.

    The smallest lag with an estimate below 1 is appended to the table when
    the lags are `1..R`. For the doubling process with depth-1 events the
    exact coefficients enter the summary.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code.
    """
    process = _process(args, config)
    defaults = config.custom.mixing
    family = mixing_models.EventFamily(
        thresholds=_fill(args, "thresholds", defaults.thresholds),
        depth=_fill(args, "depth", 1),
        min_count=_fill(args, "min_count", defaults.min_count),
    )
    replicas = _fill(args, "replicas", defaults.replicas)
    anchor = _fill(args, "anchor", family.depth - 1)
    block_size = config.custom.processes.mixing_block_size
    started = time.perf_counter()
    estimates = psi_profile(
        process,
        args.lags,
        family,
        replicas,
        args.seed,
        anchor=anchor,
        block_size=block_size,
        workers=_workers(args, config),
        progress=args.progress,
    )
    comments = []
    metrics: Dict[str, Any] = {"estimates": [_metrics(e) for e in estimates]}
    if list(args.lags) == list(range(1, len(args.lags) + 1)):
        result = min_mixing_lag(estimates)
        found = result.lag if result.witnessed else "none"
        comments.append(f"min_mixing_lag={found}")
        metrics["min_mixing_lag"] = _metrics(result)
        metrics["amplification"] = result.amplification
    plot_rows = [("mixing", "psi_lower_bound", e.lag, e.value) for e in estimates]
    if isinstance(process, DoublingPareto) and family.depth == 1:
        exact = [
            exact_dyadic_psi(process.gamma, family.thresholds, lag)
            for lag in args.lags
            if lag <= MAX_DYADIC_LAG
        ]
        metrics["exact"] = [_metrics(e) for e in exact]
        plot_rows += [("mixing", "psi_exact", e.lag, e.value) for e in exact]
    out = _output(args)
    outputs = [
        write_csv(
            out,
            mixing_models.CSV_HEADER,
            [e.csv_row() for e in estimates],
            comments=comments,
        )
    ]
    outputs += _write_plot_data(args, plot_rows)
    canonical = {
        "process": json.loads(process.canonical_json()),
        "family": json.loads(family.json(sort_keys=True)),
        "lags": list(args.lags),
        "replicas": replicas,
        "master_seed": args.seed,
        "anchor": anchor,
        "block_size": block_size,
    }
    summary = write_json(
        run_summary(canonical, metrics, time.perf_counter() - started),
        sibling(out, "summary").with_suffix(".json"),
    )
    _write_manifest(
        args, outputs + [summary], config=canonical, master_seed=args.seed
    )
    return 0


def _map_and_observable(
    args: argparse.Namespace,
) -> Tuple[PiecewiseMapSpec, StepObservable]:
    """Map and observable from `--map-file` or the built-in Lueroth map."""
    if args.map_file is not None:
        try:
            with open(args.map_file, encoding="utf-8") as _file:
                content = json.load(_file)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"Cannot read '{args.map_file}': {exc}") from exc
        if not isinstance(content, dict) or not {"map", "observable"} <= set(
            content
        ):
            raise ConfigError(f"'{args.map_file}' needs keys 'map' and 'observable'")
        return (
            PiecewiseMapSpec.parse_obj(content["map"]),
            StepObservable.parse_obj(content["observable"]),
        )
    _fill(args, "map", "luroth")
    map_spec = canonical_luroth_map(_fill(args, "prefix", DEFAULT_PREFIX))
    return map_spec, canonical_observable(map_spec, _alpha(args))


def cmd_validate_map(args: argparse.Namespace, config: AppConfig) -> int:
    """Check the conditions of an interval map and observable.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code; 1 if any check failed.
    """
    if args.map is not None and args.map_file is not None:
        raise ConfigError("give either --map or --map-file, not both")
    map_spec, observable = _map_and_observable(args)
    report = validate_example_conditions(
        map_spec,
        observable,
        k_bound=_fill(args, "k_bound", DEFAULT_K_BOUND),
        level_max=_fill(args, "level_max", LEVEL_MAX),
    )
    out = _output(args)
    outputs = [
        write_csv(
            out,
            CHECK_CSV_HEADER,
            [(c.name, c.status.value, c.witness) for c in report.checks],
        )
    ]
    _write_manifest(
        args,
        outputs,
        config={
            "map": json.loads(map_spec.json(sort_keys=True)),
            "observable": json.loads(observable.json(sort_keys=True)),
            "k_bound": args.k_bound,
            "level_max": args.level_max,
        },
    )
    if not report.passed:
        logger.error(f"Failed checks: {', '.join(report.failed())}.")
        return 1
    return 0


def cmd_sample_path(args: argparse.Namespace, config: AppConfig) -> int:
    """Dump the path of one replica in the raw path format.

    Args:
        args: Parsed arguments.
        config: Application configuration.

    Returns:
        Exit code.
    """
    process = _process(args, config)
    replica = _fill(args, "replica", 0)
    path = sample_path(process, args.n, args.seed, replica_key(replica), replica)
    outputs = [write_path(path, _output(args, ".txt"))]
    _write_manifest(
        args,
        outputs,
        config={"process": json.loads(process.canonical_json()), "n": args.n},
        master_seed=args.seed,
    )
    return 0

