"""trimlab command-line entry point."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from trimlab.app import init_app
from trimlab.cli import controllers
from trimlab.cli.controllers import TRANSIENT
from trimlab.exceptions import ConfigError, resolve_exception
from trimlab.norming.models import parse_count
from trimlab.version import __version__

logger = logging.getLogger(__name__)


def parse_counts(text: str) -> List[int]:
    """Parse comma-separated counts such as `1e3,1e4`."""
    try:
        return [parse_count(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_floats(text: str) -> List[float]:
    """Parse comma-separated reals."""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_lags(text: str) -> List[int]:
    """Parse a lag range `1..4` or a list `1,2,5`."""
    if ".." in text:
        first, _, last = text.partition("..")
        try:
            return list(range(int(first), int(last) + 1))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid lag range: {text}") from exc
    return parse_counts(text)


def parse_single_count(text: str) -> int:
    """Parse one count, scientific notation allowed."""
    try:
        return parse_count(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _common_parser() -> argparse.ArgumentParser:
    """Options shared by all commands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=Path, help="JSON file with arguments or a run manifest"
    )
    common.add_argument(
        "--workers", type=int, help="worker processes (default: TRIMLAB_WORKERS)"
    )
    common.add_argument("--progress", action="store_true", help="show progress bar")
    common.add_argument("--verbose", action="store_true", help="log debug messages")
    common.add_argument("--out", type=Path, help="output file")
    common.add_argument(
        "--plot-data", type=Path, help="also write tidy long-format plot data"
    )
    return common


def _add_tail_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="tail index in (0,1)")
    parser.add_argument(
        "--L", dest="L", help="slowly varying part, e.g. const:1 or logpow:1"
    )


def _add_process_options(
    parser: argparse.ArgumentParser,
    choices: Sequence[str],
) -> None:
    parser.add_argument("--process", choices=choices, help="process kind")
    _add_tail_options(parser)
    if "doubling-pareto" in choices:
        parser.add_argument("--gamma", type=float, help="exponent, greater than 1")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--replicas", type=parse_single_count, help="replicas M")
    parser.add_argument("--seed", type=int, help="master seed (mandatory)")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one sub-command per operation."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="trimlab",
        description="Monte Carlo and numerics lab for trimmed Birkhoff sums.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    norming = commands.add_parser(
        "norming-table", parents=[common], help="tabulate norming sequences"
    )
    _add_tail_options(norming)
    norming.add_argument("--schedule", help="pow:<theta> or explicit:<n>=<b>,...")
    norming.add_argument("--checkpoints", type=parse_counts, help="e.g. 1e3,1e4")
    norming.set_defaults(
        handler=controllers.cmd_norming_table,
        required=("alpha", "schedule", "checkpoints"),
    )

    verify = commands.add_parser(
        "verify-mean", parents=[common], help="check mean convergence"
    )
    _add_process_options(verify, ("iid", "luroth"))
    verify.add_argument("--schedule", help="pow:<theta> or explicit:<n>=<b>,...")
    verify.add_argument("--checkpoints", type=parse_counts, help="e.g. 1e3,1e4")
    _add_run_options(verify)
    verify.add_argument("--epsilon-grid", type=parse_floats, help="e.g. 0.1,0.25")
    verify.set_defaults(
        handler=controllers.cmd_verify_mean,
        required=("process", "alpha", "schedule", "checkpoints", "replicas", "seed"),
    )

    counter = commands.add_parser(
        "counterexample", parents=[common], help="exhibit infinite trimmed means"
    )
    counter.add_argument("--gamma", type=float, help="exponent, greater than 1")
    counter.add_argument("--n", type=parse_single_count, help="path length")
    counter.add_argument("--b", type=parse_single_count, help="trimming count")
    counter.add_argument("--schedule", help="schedule used when --b is not given")
    _add_run_options(counter)
    counter.add_argument("--hill-k", type=parse_single_count, help="Hill order")
    counter.add_argument("--omega-grid", type=parse_floats, help="e.g. 0.5,0.1")
    counter.add_argument("--window-bits", type=int, help="bits after the first 1")
    counter.add_argument("--max-window-bits", type=int, help="leading zeros allowed")
    counter.set_defaults(
        handler=controllers.cmd_counterexample,
        required=("gamma", "n", "replicas", "seed"),
    )

    mixing = commands.add_parser(
        "mixing", parents=[common], help="estimate dependence coefficients"
    )
    _add_process_options(mixing, ("iid", "luroth", "doubling-pareto"))
    mixing.add_argument("--lags", type=parse_lags, help="e.g. 1..4")
    mixing.add_argument("--thresholds", type=parse_floats, help="e.g. 4,16,64")
    mixing.add_argument("--depth", type=int, choices=(1, 2), help="event depth")
    mixing.add_argument("--min-count", type=int, help="count floor, at least 20")
    mixing.add_argument("--anchor", type=int, help="last past coordinate")
    _add_run_options(mixing)
    mixing.set_defaults(
        handler=controllers.cmd_mixing, required=("process", "lags", "seed")
    )

    truncation = commands.add_parser(
        "truncation-check", parents=[common], help="check truncated sums"
    )
    _add_process_options(truncation, ("iid", "luroth"))
    truncation.add_argument("--schedule", help="pow:<theta> or explicit:...")
    truncation.add_argument("--checkpoints", type=parse_counts, help="e.g. 1e4")
    truncation.add_argument("--f", type=float, help="fixed truncation level")
    _add_run_options(truncation)
    truncation.set_defaults(
        handler=controllers.cmd_truncation_check,
        required=("process", "alpha", "schedule", "checkpoints", "replicas", "seed"),
    )

    validate = commands.add_parser(
        "validate-map", parents=[common], help="check an interval map"
    )
    validate.add_argument("--map", choices=("luroth",), help="built-in map")
    validate.add_argument("--map-file", type=Path, help="JSON map and observable")
    validate.add_argument("--alpha", type=float, help="observable tail index")
    validate.add_argument("--prefix", type=int, help="explicit Lueroth cells")
    validate.add_argument("--k-bound", type=float, help="variation constant k")
    validate.add_argument("--level-max", type=float, help="largest level checked")
    validate.set_defaults(handler=controllers.cmd_validate_map, required=())

    dump = commands.add_parser(
        "sample-path", parents=[common], help="dump a raw sample path"
    )
    _add_process_options(dump, ("iid", "luroth", "doubling-pareto"))
    dump.add_argument("--n", type=parse_single_count, help="path length")
    dump.add_argument("--replica", type=int, help="replica index")
    dump.add_argument("--seed", type=int, help="master seed (mandatory)")
    dump.set_defaults(
        handler=controllers.cmd_sample_path, required=("process", "n", "seed")
    )
    return parser


def _load_arguments(path: Path, command: str) -> Dict[str, Any]:
    """Read arguments from a JSON file or a run manifest."""
    try:
        with open(path, encoding="utf-8") as _file:
            content = json.load(_file)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"Cannot read '{path}': {exc}") from exc
    if not isinstance(content, dict):
        raise ConfigError(f"'{path}' does not hold a JSON object")
    if "arguments" in content:
        if content.get("command", command) != command:
            raise ConfigError(
                f"'{path}' is a manifest of '{content['command']}', not '{command}'"
            )
        content = content["arguments"]
    return {key.replace("-", "_"): value for key, value in content.items()}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse the command line, merging a `--config` file below explicit flags.

    Raises:
        SystemExit: Usage error (exit code 2).
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            stored = _load_arguments(args.config, args.command)
        except ConfigError as exc:
            parser.error(str(exc))
        subparser = _subparser(parser, args.command)
        subparser.set_defaults(
            **{key: value for key, value in stored.items() if key not in TRANSIENT}
        )
        args = parser.parse_args(argv)
    missing = [name for name in args.required if getattr(args, name, None) is None]
    if missing:
        _subparser(parser, args.command).error(
            "the following arguments are required: "
            + ", ".join(f"--{name.replace('_', '-')}" for name in missing)
        )
    return args


def _subparser(
    parser: argparse.ArgumentParser, command: str
) -> argparse.ArgumentParser:
    """Return the sub-parser of `command`."""
    for action in parser._actions:  # pylint: disable=protected-access
        if isinstance(action, argparse._SubParsersAction):  # pylint: disable=W0212
            return action.choices[command]
    raise KeyError(command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command.

    Returns:
        Exit code: 0 on success, 1 on runtime failures, 2 on usage or
        configuration errors.
    """
    args = parse_args(argv)
    try:
        config = init_app(verbose=args.verbose)
        return args.handler(args, config)
    except Exception as exc:  # pylint: disable=broad-except
        entry = resolve_exception(exc)
        logger.error(f"{entry['message']} {exc}")
        return int(entry["code"])


if __name__ == "__main__":
    sys.exit(main())
