"""Exact streaming computation of Birkhoff, trimmed and truncated sums.

Sums are kept as short lists of doubles whose exact sum equals the running
total to far below one rounding unit; `math.fsum` of such a list, minus the
trimmed values, is the correctly rounded trimmed sum.
"""

import heapq
import itertools
import logging
import math
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from trimlab.exceptions import DomainError, PlanViolation, PrecisionOverflowError
from trimlab.processes.models import SamplePath
from trimlab.trimming.models import CheckpointPlan, CheckpointRow

logger = logging.getLogger(__name__)

CHUNK_SIZE = 65536

# partials kept before compression
_MAX_PARTIALS = 48

PathLike = Union[SamplePath, np.ndarray, Sequence[float], Iterable[float]]


class _ExactSum:
    """Running sum kept as a few doubles whose exact sum is the total."""

    def __init__(self) -> None:
        self.partials: List[float] = []

    def add(self, value: float) -> None:
        self.partials.append(value)
        if len(self.partials) > _MAX_PARTIALS:
            self._compress(self.partials)

    def add_many(self, values: List[float]) -> None:
        self._compress(self.partials + values)

    def _compress(self, items: List[float]) -> None:
        # rounded sum plus two rounded residuals
        head = math.fsum(items)
        first = math.fsum(itertools.chain(items, (-head,)))
        second = math.fsum(itertools.chain(items, (-head, -first)))
        self.partials = [head, first, second]

    def value(self, minus: Iterable[float] = ()) -> float:
        return math.fsum(itertools.chain(self.partials, (-x for x in minus)))


class TrimmedAccumulator:
    """Streaming state yielding `S_n`, `S_n^b` and `T_n^f`.

    Keeps the count, an exact running total, the `k_max` largest values seen
    so far (a min-heap) and one exact running sum per registered truncation
    level.

    Args:
        k_max: Number of largest values retained.
        thresholds: Truncation levels tracked from the start.

    Attributes:
        count: Number of values pushed.
        k_max: Number of largest values retained.
    """

    def __init__(self, k_max: int, thresholds: Iterable[float] = ()) -> None:
        """Class constructor."""
        if k_max < 0:
            raise DomainError("k_max must be non-negative")
        self.k_max = k_max
        self.count = 0
        self._total = _ExactSum()
        self._heap: List[float] = []
        self._truncated: Dict[float, _ExactSum] = {}
        for level in thresholds:
            if not level >= 0:
                raise DomainError(f"truncation level {level} is negative")
            self._truncated[float(level)] = _ExactSum()

    @property
    def total(self) -> float:
        """Birkhoff sum of all values pushed so far."""
        return self._total.value()

    @property
    def retained(self) -> np.ndarray:
        """Retained values, largest first."""
        return np.sort(np.asarray(self._heap, dtype=float))[::-1]

    @property
    def thresholds(self) -> List[float]:
        """Registered truncation levels."""
        return sorted(self._truncated)

    def push(self, value: float) -> "TrimmedAccumulator":
        """Ingest one value in `O(log k_max)`.

        Args:
            value: Non-negative finite value.

        Returns:
            The accumulator itself.

        Raises:
            trimlab.exceptions.DomainError: `value` is negative, NaN or
                infinite.
        """
        value = float(value)
        if not 0 <= value < math.inf:
            raise DomainError(f"value {value} is not a non-negative finite number")
        self.count += 1
        self._total.add(value)
        for level, running in self._truncated.items():
            if value <= level:
                running.add(value)
        if len(self._heap) < self.k_max:
            heapq.heappush(self._heap, value)
        elif self.k_max and value > self._heap[0]:
            heapq.heapreplace(self._heap, value)
        return self

    def extend(self, values: np.ndarray) -> "TrimmedAccumulator":
        """Ingest a chunk of values with vectorised partial selection.

        Leaves the accumulator in the same state as pushing the values one by
        one, up to the order of equal retained values.

        Args:
            values: Non-negative finite values.

        Returns:
            The accumulator itself.

        Raises:
            trimlab.exceptions.DomainError: A value is negative, NaN or
                infinite.
        """
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            return self
        if not np.all((values >= 0) & np.isfinite(values)):
            raise DomainError("values must be non-negative and finite")
        self.count += int(values.size)
        self._total.add_many(values.tolist())
        for level, running in self._truncated.items():
            running.add_many(values[values <= level].tolist())
        if self.k_max:
            pool = np.concatenate([np.asarray(self._heap, dtype=float), values])
            if pool.size > self.k_max:
                pool = np.partition(pool, pool.size - self.k_max)[-self.k_max :]
            self._heap = pool.tolist()
            heapq.heapify(self._heap)
        return self

    def trimmed_sum(self, b: int) -> float:
        """Return the sum without its `b` largest values.

        Defined through the multiset of the `b` largest values, so ties do not
        matter.

        Args:
            b: Trimming count, `0 <= b <= min(count, k_max)`.

        Returns:
            `S_n^b`; `S_n` for `b = 0` and 0 for `b = count`.

        Raises:
            trimlab.exceptions.PlanViolation: `b` exceeds `k_max` or `count`.
        """
        if b < 0 or b > self.k_max:
            raise PlanViolation(f"b={b} exceeds k_max={self.k_max}")
        if b > self.count:
            raise PlanViolation(f"b={b} exceeds the {self.count} values pushed")
        if b == self.count:
            return 0.0
        if b == 0:
            return self.total
        return self._total.value(minus=heapq.nlargest(b, self._heap))

    def truncated_sum(self, f: float) -> float:
        """Return the sum of values not exceeding a registered level `f`.

        Raises:
            trimlab.exceptions.PlanViolation: `f` was not registered.
        """
        running = self._truncated.get(float(f))
        if running is None:
            raise PlanViolation(f"truncation level {f} was not registered")
        return running.value()


def truncated_sum(source: Union[TrimmedAccumulator, PathLike], f: float) -> float:
    """Return `T_n^f`, the sum of values not exceeding `f`.

    Args:
        source: Accumulator with `f` registered, or a path.
        f: Non-negative truncation level.

    Returns:
        Truncated sum.

    Raises:
        trimlab.exceptions.DomainError: `f` is negative.
    """
    if not f >= 0:
        raise DomainError(f"truncation level {f} is negative")
    if isinstance(source, TrimmedAccumulator):
        return source.truncated_sum(f)
    values = _as_array(source)
    return math.fsum(values[values <= f].tolist())


def _as_array(source: PathLike) -> np.ndarray:
    if isinstance(source, SamplePath):
        return source.values
    return np.asarray(list(source) if _is_iterator(source) else source, dtype=float)


def _is_iterator(source: object) -> bool:
    return not isinstance(source, (np.ndarray, list, tuple)) and hasattr(
        source, "__iter__"
    )


def _chunks(
    values: Union[np.ndarray, Iterator[float]],
    start: int,
    stop: int,
    chunk_size: int,
) -> Iterator[np.ndarray]:
    """Yield consecutive chunks of positions `start .. stop - 1`."""
    for low in range(start, stop, chunk_size):
        high = min(stop, low + chunk_size)
        if isinstance(values, np.ndarray):
            yield values[low:high]
        else:
            chunk = np.fromiter(
                itertools.islice(values, high - low), dtype=float, count=-1
            )
            if chunk.size < high - low:
                raise PlanViolation(f"path ended after {low + chunk.size} values")
            yield chunk


def _single_pass(
    values: Union[np.ndarray, Iterator[float]],
    plan: CheckpointPlan,
    chunk_size: int,
) -> List[CheckpointRow]:
    accumulator = TrimmedAccumulator(plan.k_max, plan.thresholds())
    rows: List[CheckpointRow] = []
    position = 0
    for checkpoint in plan.checkpoints:
        try:
            for chunk in _chunks(values, position, checkpoint.n, chunk_size):
                accumulator.extend(chunk)
        except PrecisionOverflowError as exc:
            exc.checkpoint = checkpoint.n
            raise
        position = checkpoint.n
        rows.append(
            CheckpointRow(
                n=checkpoint.n,
                b=checkpoint.b,
                f=checkpoint.f,
                total=accumulator.total,
                trimmed=accumulator.trimmed_sum(checkpoint.b),
                truncated=accumulator.truncated_sum(checkpoint.f),
            )
        )
    return rows


def run_plan(
    path: PathLike,
    plan: CheckpointPlan,
    chunk_size: int = CHUNK_SIZE,
) -> List[CheckpointRow]:
    """Evaluate all checkpoints of a plan in one pass over a path.

    Plans whose trimming counts decrease somewhere are split into monotone
    passes; an iterator input is then materialised first.

    Args:
        path: Sample path, array, sequence or iterator of values.
        plan: Checkpoint plan.
        chunk_size: Values ingested per vectorised step.

    Returns:
        One row per checkpoint, ordered by `n`.

    Raises:
        trimlab.exceptions.PlanViolation: A checkpoint exceeds the path
            length.
        trimlab.exceptions.PrecisionOverflowError: Raised by a lazy
            generator; the checkpoint being computed is attached.
    """
    if chunk_size < 1:
        raise DomainError("chunk_size must be positive")
    lazy: Optional[Iterator[float]] = None
    values: Optional[np.ndarray] = None
    if isinstance(path, SamplePath):
        values = path.values
    elif _is_iterator(path):
        lazy = iter(path)  # type: ignore[arg-type]
    else:
        values = np.asarray(path, dtype=float)
    if not plan.checkpoints:
        return []
    passes = plan.split()
    if lazy is not None and len(passes) > 1:
        logger.warning(
            f"Plan needs {len(passes)} passes; materialising {plan.max_n} values."
        )
        values = np.fromiter(itertools.islice(lazy, plan.max_n), dtype=float)
        lazy = None
    if values is not None and plan.max_n > values.shape[0]:
        raise PlanViolation(
            f"checkpoint n={plan.max_n} exceeds path length {values.shape[0]}"
        )
    if lazy is not None:
        return _single_pass(lazy, plan, chunk_size)
    assert values is not None
    rows: List[CheckpointRow] = []
    for monotone in passes:
        rows.extend(_single_pass(values, monotone, chunk_size))
    return sorted(rows, key=lambda row: row.n)
