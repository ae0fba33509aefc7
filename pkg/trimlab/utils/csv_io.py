"""Locale-independent CSV output.

Numbers are written with 17 significant digits so that every double
round-trips; the dialect is the `csv` module default (RFC 4180 quoting and
CRLF line endings).
"""

import csv
import logging
import math
import numbers
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

PARTIAL_FOOTER = "# partial=true"


def format_cell(value: Any) -> str:
    """Format one CSV cell.

    Floats use 17 significant digits; non-finite floats are written as `nan`,
    `inf` and `-inf`; booleans as `true`/`false`; `None` as the empty string.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return f"{number:.17g}"
    return str(value)


def write_csv(
    destination: Union[str, Path],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    partial: bool = False,
    comments: Optional[List[str]] = None,
) -> Path:
    """Write a table with a header row.

    Args:
        destination: Output file.
        header: Column names.
        rows: Table rows, one value per column.
        partial: Append the footer line `# partial=true`.
        comments: Extra `#`-prefixed lines appended after the rows.

    Returns:
        Path of the written file.
    """
    destination = Path(destination)
    count = 0
    with open(destination, "w", encoding="utf-8", newline="") as _file:
        writer = csv.writer(_file)
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(
                    f"row has {len(row)} cells, header has {len(header)}"
                )
            writer.writerow([format_cell(value) for value in row])
            count += 1
        for line in comments or []:
            _file.write(f"# {line}\r\n")
        if partial:
            _file.write(f"{PARTIAL_FOOTER}\r\n")
    logger.info(f"Wrote {count} rows to '{destination}'.")
    return destination


def read_csv(source: Union[str, Path]) -> List[dict]:
    """Read a table written by `write_csv()`, skipping `#` footer lines."""
    with open(source, encoding="utf-8", newline="") as _file:
        lines = [line for line in _file if not line.startswith("#")]
    return list(csv.DictReader(lines))
