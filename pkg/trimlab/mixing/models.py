"""Models for dependence estimation."""

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, validator  # pylint: disable=no-name-in-module

# pragma pylint: disable=too-few-public-methods

CSV_HEADER: Tuple[str, ...] = ("lag", "psi_lower_bound", "argmax_B", "argmax_C", "M")


class Event(BaseModel):
    """Threshold event on consecutive coordinates.

    The event is `{X[start + j] > thresholds[j] for all j}`.

    Args:
        start: Index of the first coordinate.
        thresholds: One threshold per coordinate.
    """

    start: int
    thresholds: Tuple[float, ...]

    class Config:
        """Model configuration."""

        allow_mutation = False

    def describe(self) -> str:
        """Human-readable descriptor, e.g. `X[3]>4&X[4]>16`."""
        return "&".join(
            f"X[{self.start + offset}]>{threshold:g}"
            for offset, threshold in enumerate(self.thresholds)
        )

    def hits(self, paths: np.ndarray) -> np.ndarray:
        """Boolean indicator of the event per row of `paths`."""
        hit = np.ones(paths.shape[0], dtype=bool)
        for offset, threshold in enumerate(self.thresholds):
            hit &= paths[:, self.start + offset] > threshold
        return hit


class EventFamily(BaseModel):
    """Finite family of threshold events.

    At depth 1 the events are `{X_i > a}` for `a` in `thresholds`; depth 2
    adds `{X_{i-1} > a, X_i > a'}` for all pairs of thresholds.

    Args:
        thresholds: Strictly increasing thresholds.
        depth: Number of adjacent coordinates an event may involve.
        min_count: Count floor for every event and expected joint count.

    Raises:
        pydantic.ValidationError: The parameters violate the constraints.
    """

    thresholds: List[float]
    depth: Literal[1, 2] = 1
    min_count: int = 20

    class Config:
        """Model configuration."""

        allow_mutation = False

    @validator("thresholds")
    def thresholds_increasing(  # pylint: disable=no-self-argument
        cls,
        value: List[float],
    ) -> List[float]:
        """Ensure that thresholds are non-empty and strictly increasing."""
        if not value:
            raise ValueError("at least one threshold is required")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("thresholds must be strictly increasing")
        return value

    @validator("min_count")
    def min_count_floor(cls, value: int) -> int:  # pylint: disable=no-self-argument
        """Ensure that `min_count` is at least 20."""
        if value < 20:
            raise ValueError("min_count must be at least 20")
        return value

    def past_events(self, anchor: int) -> List[Event]:
        """Events generated by coordinates up to `anchor`."""
        events = [Event(start=anchor, thresholds=(a,)) for a in self.thresholds]
        if self.depth == 2:
            events += [
                Event(start=anchor - 1, thresholds=(a, b))
                for a in self.thresholds
                for b in self.thresholds
            ]
        return events

    def future_events(self, start: int) -> List[Event]:
        """Events generated by coordinates from `start` on."""
        events = [Event(start=start, thresholds=(a,)) for a in self.thresholds]
        if self.depth == 2:
            events += [
                Event(start=start, thresholds=(a, b))
                for a in self.thresholds
                for b in self.thresholds
            ]
        return events


class EventCounts(BaseModel):
    """Across-replica counts of past, future and joint events at one lag.

    Counts merge by addition, so blocks of replicas can be reduced in any
    grouping.

    Args:
        lag: Distance between the past and the future coordinates.
        anchor: Index of the last past coordinate.
        past: Descriptors of the past events.
        future: Descriptors of the future events.
        past_counts: Hits per past event.
        future_counts: Hits per future event.
        joint_counts: Joint hits, indexed `[past, future]`.
        total: Number of replicas.
    """

    lag: int
    anchor: int
    past: List[str]
    future: List[str]
    past_counts: np.ndarray
    future_counts: np.ndarray
    joint_counts: np.ndarray
    total: int

    class Config:
        """Model configuration."""

        arbitrary_types_allowed = True

    def merge(self, other: "EventCounts") -> "EventCounts":
        """Add the counts of another block."""
        if (self.lag, self.anchor, self.past, self.future) != (
            other.lag,
            other.anchor,
            other.past,
            other.future,
        ):
            raise ValueError("counts of different event layouts cannot be merged")
        return EventCounts(
            lag=self.lag,
            anchor=self.anchor,
            past=self.past,
            future=self.future,
            past_counts=self.past_counts + other.past_counts,
            future_counts=self.future_counts + other.future_counts,
            joint_counts=self.joint_counts + other.joint_counts,
            total=self.total + other.total,
        )


class PsiEstimate(BaseModel):
    """Restricted supremum of the dependence measure at one lag.

    Args:
        lag: Lag.
        value: Supremum over the admissible event pairs.
        argmax_events: Descriptors of the maximizing past and future events.
        sample_size: Number of replicas; 0 for exact values.
        standard_error: Delta-method standard error of `value`; `None` when
            undefined or for exact values.
        lower_bound: Whether `value` only bounds the coefficient from below,
            which holds for every value restricted to a finite event family.
        pairs: Number of event pairs that entered the supremum.
    """

    lag: int
    value: float
    argmax_events: Tuple[str, str]
    sample_size: int
    standard_error: Optional[float] = None
    lower_bound: bool = True
    pairs: int = 0

    def csv_row(self) -> Tuple[int, float, str, str, int]:
        """Cells matching `CSV_HEADER`."""
        return (
            self.lag,
            self.value,
            self.argmax_events[0],
            self.argmax_events[1],
            self.sample_size,
        )


class MixingLagResult(BaseModel):
    """Smallest lag whose dependence coefficient falls below a threshold.

    Args:
        lag: Smallest such lag; `None` if not witnessed.
        witnessed: Whether such a lag was found up to `max_lag`.
        threshold: Threshold the coefficient is compared against.
        max_lag: Largest lag examined.
        value: Coefficient at `lag`.
    """

    lag: Optional[int] = None
    witnessed: bool = False
    threshold: float = 1.0
    max_lag: int
    value: Optional[float] = None

    @property
    def amplification(self) -> Optional[float]:
        """Return `(1 + psi)^2 / (1 - psi)` at the witnessed lag.

        This is the factor by which dependence at the first lag with
        `psi < 1` inflates variance bounds of block sums.
        """
        if self.value is None or self.value >= 1:
            return None
        return (1 + self.value) ** 2 / (1 - self.value)
