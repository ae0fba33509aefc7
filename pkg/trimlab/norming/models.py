"""Trimming schedule and norming table models."""

import logging
import math
import re
from typing import Dict, List, Literal, Sequence, Tuple, Union

from pydantic import BaseModel, validator  # pylint: disable=no-name-in-module

from trimlab.exceptions import ScheduleError

# pragma pylint: disable=too-few-public-methods

logger = logging.getLogger(__name__)

CSV_HEADER: Tuple[str, ...] = ("n", "b", "zeta", "g", "d", "ratio_dg_over_ab")

# keeps exact powers such as 10000 ** 0.5 from rounding up
_CEIL_SHRINK = 1 - 1e-12


class _Schedule(BaseModel):
    """Base class of trimming schedules."""

    class Config:
        """Model configuration."""

        allow_mutation = False

    def b(self, n: int) -> int:
        """Trimming count at `n`."""
        raise NotImplementedError

    def spec_string(self) -> str:
        """Canonical command-line representation."""
        raise NotImplementedError

    def check_grid(self, checkpoints: Sequence[int]) -> List[int]:
        """Check `b_n -> inf` and `b_n / n -> 0` numerically on a grid.

        Args:
            checkpoints: Strictly increasing checkpoints.

        Returns:
            Trimming counts along the grid.

        Raises:
            trimlab.exceptions.ScheduleError: Some `b_n` is 0 or not below
                `n`.
        """
        counts = [self.b(n) for n in checkpoints]
        for n, count in zip(checkpoints, counts):
            if count < 1:
                raise ScheduleError(
                    f"b_n={count} at n={n}: schedule must tend to infinity", n=n
                )
            if count >= n:
                raise ScheduleError(f"b_n={count} at n={n} is not below n", n=n)
        if len(counts) > 1:
            if counts[-1] <= counts[0]:
                logger.warning(f"Trimming counts do not grow along the grid: {counts}")
            fractions = [count / n for n, count in zip(checkpoints, counts)]
            if fractions[-1] >= fractions[0]:
                logger.warning(
                    f"Trimmed fraction b_n/n does not decrease along the grid: "
                    f"{fractions}"
                )
        return counts


class PowerRule(_Schedule):
    """Schedule `b_n = ceil(n ** theta)`.

    Args:
        theta: Exponent in (0, 1).
    """

    kind: Literal["power"] = "power"
    theta: float

    @validator("theta")
    def theta_in_unit_interval(  # pylint: disable=no-self-argument
        cls,
        value: float,
    ) -> float:
        """Ensure that `theta` lies in (0, 1)."""
        if not 0 < value < 1:
            raise ValueError("theta must be in (0,1)")
        return value

    def b(self, n: int) -> int:
        return math.ceil(n**self.theta * _CEIL_SHRINK)

    def spec_string(self) -> str:
        return f"pow:{self.theta!r}"


class ExplicitSchedule(_Schedule):
    """Schedule given by a table `n -> b_n`.

    Args:
        table: Trimming count per checkpoint.
    """

    kind: Literal["explicit"] = "explicit"
    table: Dict[int, int]

    def b(self, n: int) -> int:
        try:
            return self.table[n]
        except KeyError as exc:
            raise ScheduleError(f"no trimming count for n={n}", n=n) from exc

    def spec_string(self) -> str:
        items = ",".join(f"{n}={b}" for n, b in sorted(self.table.items()))
        return f"explicit:{items}"


TrimmingSchedule = Union[PowerRule, ExplicitSchedule]

_POWER_PATTERN = re.compile(r"^pow:([^,]+)$")
_EXPLICIT_PATTERN = re.compile(r"^explicit:(.+)$")


def parse_count(text: str) -> int:
    """Parse a count written as an integer or in scientific notation."""
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not a whole number: {text}")
    return int(value)


def parse_schedule(text: str) -> TrimmingSchedule:
    """Parse `pow:<theta>` or `explicit:<n>=<b>,...`.

    Raises:
        ValueError: The string is not a valid schedule.
    """
    text = text.strip()
    match = _POWER_PATTERN.match(text)
    if match is not None:
        return PowerRule(theta=float(match.group(1)))
    match = _EXPLICIT_PATTERN.match(text)
    if match is not None:
        table: Dict[int, int] = {}
        for item in match.group(1).split(","):
            n, _, b = item.partition("=")
            if not b:
                raise ValueError(f"invalid schedule entry: {item}")
            table[parse_count(n)] = parse_count(b)
        return ExplicitSchedule(table=table)
    raise ValueError(f"invalid schedule: {text}")


class NormingRow(BaseModel):
    """Deterministic sequences at one checkpoint.

    Args:
        n: Checkpoint.
        b: Trimming count `b_n`.
        zeta: `b_n ** (2/3)`.
        g: Quantile threshold `g_n`.
        d: Norming constant `d_n`.
        ratio_dg_over_ab: `(d_n / g_n) / (alpha / (1 - alpha) b_n)`.
        truncation_asymptotic: `n alpha / (1 - alpha) L(g_n) g_n^(1 - alpha)`,
            the asymptotic of the mean truncated sum at level `g_n`.
    """

    n: int
    b: int
    zeta: float
    g: float
    d: float
    ratio_dg_over_ab: float
    truncation_asymptotic: float

    def csv_row(self) -> Tuple[int, int, float, float, float, float]:
        """Cells matching `CSV_HEADER`."""
        return (self.n, self.b, self.zeta, self.g, self.d, self.ratio_dg_over_ab)


class NormingTable(BaseModel):
    """Norming rows along a checkpoint grid.

    Args:
        rows: One row per checkpoint.
    """

    rows: List[NormingRow] = []

    def row(self, n: int) -> NormingRow:
        """Row of checkpoint `n`."""
        for item in self.rows:
            if item.n == n:
                return item
        raise KeyError(n)
