"""Checkpoint plans and checkpoint rows."""

import math
from typing import List, Tuple

from pydantic import (  # pylint: disable=no-name-in-module
    BaseModel,
    root_validator,
    validator,
)

# pragma pylint: disable=too-few-public-methods

CSV_HEADER: Tuple[str, ...] = (
    "n",
    "b",
    "f",
    "sum",
    "trimmed_sum",
    "truncated_sum",
)


class Checkpoint(BaseModel):
    """Prefix length with its trimming count and truncation level.

    Args:
        n: Prefix length, at least 1.
        b: Number of largest values trimmed, `0 <= b < n`.
        f: Truncation level, non-negative; `inf` disables truncation.
    """

    n: int
    b: int = 0
    f: float = math.inf

    class Config:
        """Model configuration."""

        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def consistent(cls, values):  # pylint: disable=no-self-argument
        """Ensure `n >= 1`, `0 <= b < n` and `f >= 0`."""
        if values["n"] < 1:
            raise ValueError("checkpoint n must be at least 1")
        if not 0 <= values["b"] < values["n"]:
            raise ValueError(f"need 0 <= b < n, got b={values['b']}, n={values['n']}")
        if not values["f"] >= 0:
            raise ValueError("truncation level must be non-negative")
        return values


class CheckpointPlan(BaseModel):
    """Strictly increasing checkpoints evaluated along one path.

    Args:
        checkpoints: Checkpoints ordered by `n`.
    """

    checkpoints: List[Checkpoint]

    @validator("checkpoints")
    def strictly_increasing(  # pylint: disable=no-self-argument
        cls,
        value: List[Checkpoint],
    ) -> List[Checkpoint]:
        """Ensure strictly increasing prefix lengths."""
        if any(a.n >= b.n for a, b in zip(value, value[1:])):
            raise ValueError("checkpoints must be strictly increasing in n")
        return value

    @classmethod
    def from_tuples(cls, items: List[Tuple[int, int, float]]) -> "CheckpointPlan":
        """Build a plan from `(n, b, f)` tuples."""
        return cls(checkpoints=[Checkpoint(n=n, b=b, f=f) for n, b, f in items])

    @property
    def k_max(self) -> int:
        """Largest trimming count of the plan."""
        return max((c.b for c in self.checkpoints), default=0)

    @property
    def max_n(self) -> int:
        """Largest prefix length of the plan."""
        return self.checkpoints[-1].n if self.checkpoints else 0

    def thresholds(self) -> List[float]:
        """Distinct truncation levels, sorted."""
        return sorted({c.f for c in self.checkpoints})

    def is_monotone(self) -> bool:
        """Whether trimming counts are non-decreasing."""
        return all(a.b <= b.b for a, b in zip(self.checkpoints, self.checkpoints[1:]))

    def split(self) -> List["CheckpointPlan"]:
        """Split into plans with non-decreasing trimming counts.

        Checkpoints are dealt greedily to the first pass whose last count does
        not exceed theirs, so a monotone plan yields itself.
        """
        passes: List[List[Checkpoint]] = []
        for checkpoint in self.checkpoints:
            for current in passes:
                if current[-1].b <= checkpoint.b:
                    current.append(checkpoint)
                    break
            else:
                passes.append([checkpoint])
        return [CheckpointPlan(checkpoints=items) for items in passes]


class CheckpointRow(BaseModel):
    """Exact sums of one prefix.

    Args:
        n: Prefix length.
        b: Trimming count.
        f: Truncation level.
        total: Birkhoff sum `S_n`.
        trimmed: Trimmed sum `S_n^b`.
        truncated: Truncated sum `T_n^f`.
    """

    n: int
    b: int
    f: float
    total: float
    trimmed: float
    truncated: float

    class Config:
        """Model configuration."""

        allow_mutation = False

    def as_tuple(self) -> Tuple[int, float, float, float]:
        """Return `(n, S_n, S_n^b, T_n^f)`."""
        return (self.n, self.total, self.trimmed, self.truncated)

    def csv_row(self) -> Tuple[int, int, float, float, float, float]:
        """Cells matching `CSV_HEADER`."""
        return (self.n, self.b, self.f, self.total, self.trimmed, self.truncated)
