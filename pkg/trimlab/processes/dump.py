"""Raw sample path dump format.

A dump starts with the header `# trimlab-path v1 spec=<canonical-json>
seed=<u64>`, optionally followed by `# stream=<i>.<j>...`, then holds one
value per line in scientific notation with 17 significant digits.
"""

import logging
import re
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import parse_raw_as  # pylint: disable=no-name-in-module

from trimlab.exceptions import ConfigError
from trimlab.processes.models import ProcessSpec, SamplePath
from trimlab.utils.seeds import SeedKey

logger = logging.getLogger(__name__)

HEADER_PATTERN = re.compile(r"^# trimlab-path v1 spec=(\{.*\}) seed=(\d+)$")
STREAM_PATTERN = re.compile(r"^# stream=([\d.]*)$")


def format_header(spec: ProcessSpec, seed: int) -> str:
    """Return the header line of a dump (without newline)."""
    return f"# trimlab-path v1 spec={spec.canonical_json()} seed={seed}"


def write_path(path: SamplePath, destination: Union[str, Path]) -> Path:
    """Write a sample path to disk.

    Args:
        path: Sample path.
        destination: Output file.

    Returns:
        Path of the written file.
    """
    destination = Path(destination)
    with open(destination, "w", encoding="utf-8", newline="\n") as _file:
        _file.write(format_header(path.spec, path.seed) + "\n")
        if path.stream:
            _file.write(f"# stream={'.'.join(str(i) for i in path.stream)}\n")
        for value in path.values:
            _file.write(f"{value:.16e}\n")
    logger.info(f"Wrote {len(path)} values to '{destination}'.")
    return destination


def _parse_header(lines: List[str]) -> Tuple[ProcessSpec, int, SeedKey, int]:
    """Parse header lines; returns spec, seed, stream and lines consumed."""
    match = HEADER_PATTERN.match(lines[0].rstrip("\n")) if lines else None
    if match is None:
        raise ConfigError("not a trimlab path dump: header missing or malformed")
    spec = parse_raw_as(ProcessSpec, match.group(1))  # type: ignore[arg-type]
    seed = int(match.group(2))
    stream: SeedKey = ()
    consumed = 1
    if len(lines) > 1:
        stream_match = STREAM_PATTERN.match(lines[1].rstrip("\n"))
        if stream_match is not None:
            text = stream_match.group(1)
            stream = tuple(int(i) for i in text.split(".")) if text else ()
            consumed = 2
    return spec, seed, stream, consumed


def read_path(source: Union[str, Path]) -> SamplePath:
    """Read a sample path written by `write_path()`.

    Args:
        source: Dump file.

    Returns:
        Sample path with the recorded spec, seed and stream.

    Raises:
        trimlab.exceptions.ConfigError: The file is not a valid dump.
    """
    with open(source, encoding="utf-8") as _file:
        lines = _file.readlines()
    spec, seed, stream, consumed = _parse_header(lines)
    try:
        values = np.array(
            [float(line) for line in lines[consumed:] if line.strip()],
            dtype=float,
        )
    except ValueError as exc:
        raise ConfigError(f"malformed value in '{source}': {exc}") from exc
    return SamplePath(values=values, seed=seed, stream=stream, spec=spec)
