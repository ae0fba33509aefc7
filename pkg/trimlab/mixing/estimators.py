"""Estimators of the dependence coefficient `psi`.

For events `B`, `C` of positive probability the dependence measure is
`psi(B, C) = |P(B & C) / (P(B) P(C)) - 1|`; the coefficient at lag `n` is its
supremum over past events `B` and future events `C` that are `n` steps
apart. Only finitely many threshold events are examined, so every estimate is
a lower bound of the coefficient. Probabilities are estimated across
replicas, one observation per replica.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from trimlab.exceptions import DomainError, InsufficientDataError, UndefinedEventError
from trimlab.experiments.workers import map_ordered
from trimlab.mixing.models import EventCounts, EventFamily, MixingLagResult, PsiEstimate
from trimlab.processes.generators import sample_paths
from trimlab.processes.models import ProcessSpec, SamplePath
from trimlab.utils.seeds import batch_key

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096
MAX_DYADIC_LAG = 1000

Paths = Union[np.ndarray, Sequence[SamplePath]]


def psi_measure(joint: int, b: int, c: int, total: int) -> float:
    """Return `|(joint/total) / ((b/total) (c/total)) - 1|`.

    Evaluated as `|joint total - b c| / (b c)` in integers, so the value is
    exactly 0 whenever `joint total = b c`.

    Args:
        joint: Joint hits of `B` and `C`.
        b: Hits of `B`.
        c: Hits of `C`.
        total: Number of observations.

    Returns:
        Empirical dependence measure.

    Raises:
        trimlab.exceptions.UndefinedEventError: `b` or `c` is 0.
        trimlab.exceptions.DomainError: The counts are inconsistent.
    """
    if b == 0 or c == 0:
        raise UndefinedEventError(f"event without hits (b={b}, c={c})")
    if min(joint, b, c) < 0 or total < max(b, c) or joint > min(b, c):
        raise DomainError(f"inconsistent counts joint={joint} b={b} c={c} n={total}")
    return abs(joint * total - b * c) / (b * c)


def _as_matrix(paths: Paths) -> np.ndarray:
    """Stack replicated paths into a 2-D array; rows are replicas."""
    if isinstance(paths, np.ndarray):
        matrix = paths
    else:
        lengths = {len(path) for path in paths}
        if len(lengths) > 1:
            raise DomainError("replicated paths differ in length")
        matrix = np.array([path.values for path in paths], dtype=float)
    if matrix.ndim != 2:
        raise DomainError("replicated paths must form a 2-D array")
    return matrix


def event_counts(
    paths: Paths,
    lag: int,
    family: EventFamily,
    anchor: int,
) -> EventCounts:
    """Count past, future and joint event hits across replicas.

    Past events sit on coordinates up to `anchor`, future events on
    coordinates from `anchor + lag` on.

    Args:
        paths: Replicated paths.
        lag: Distance between past and future coordinates, at least 1.
        family: Event family.
        anchor: Index of the last past coordinate.

    Returns:
        Event counts.

    Raises:
        trimlab.exceptions.DomainError: Paths are too short or `lag`,
            `anchor` are out of range.
    """
    matrix = _as_matrix(paths)
    if lag < 1:
        raise DomainError(f"lag={lag} must be at least 1")
    if anchor < family.depth - 1:
        raise DomainError(f"anchor={anchor} leaves no room for depth {family.depth}")
    needed = anchor + lag + family.depth
    if matrix.shape[1] < needed:
        raise DomainError(
            f"paths of length {matrix.shape[1]} are shorter than {needed}"
        )
    past = family.past_events(anchor)
    future = family.future_events(anchor + lag)
    past_hits = np.array([event.hits(matrix) for event in past], dtype=np.int64)
    future_hits = np.array([event.hits(matrix) for event in future], dtype=np.int64)
    return EventCounts(
        lag=lag,
        anchor=anchor,
        past=[event.describe() for event in past],
        future=[event.describe() for event in future],
        past_counts=past_hits.sum(axis=1),
        future_counts=future_hits.sum(axis=1),
        joint_counts=past_hits @ future_hits.T,
        total=matrix.shape[0],
    )


def _standard_error(joint: int, b: int, c: int, total: int) -> Optional[float]:
    """Delta-method standard error of `psi` from multinomial cell counts."""
    if joint == 0:
        return None
    p_joint, p_b, p_c = joint / total, b / total, c / total
    gradient_joint = 1 / p_joint - 1 / p_b - 1 / p_c
    second_moment = (
        p_joint * gradient_joint**2
        + (p_b - p_joint) / p_b**2
        + (p_c - p_joint) / p_c**2
    )
    variance = max(second_moment - 1.0, 0.0) / total
    ratio = joint * total / (b * c)
    return ratio * math.sqrt(variance)


def psi_from_counts(counts: EventCounts, min_count: int) -> PsiEstimate:
    """Return the supremum of `psi` over admissible event pairs.

    A pair is admissible when the hits of both events reach `min_count`.
    Ties resolve to the first pair in event order.

    Args:
        counts: Event counts.
        min_count: Count floor.

    Returns:
        Dependence estimate at `counts.lag`.

    Raises:
        trimlab.exceptions.InsufficientDataError: Fewer than `10 min_count`
            replicas, or no admissible pair.
    """
    total = counts.total
    if total < 10 * min_count:
        raise InsufficientDataError(
            f"{total} replicas are fewer than 10 * min_count = {10 * min_count}"
        )
    b = counts.past_counts[:, None]
    c = counts.future_counts[None, :]
    product = b * c
    admissible = (b >= min_count) & (c >= min_count)
    if not np.any(admissible):
        raise InsufficientDataError(
            f"no event pair reaches min_count={min_count} at lag {counts.lag}"
        )
    deviation = np.abs(counts.joint_counts * total - product)
    values = np.full(product.shape, -np.inf)
    values[admissible] = deviation[admissible] / product[admissible]
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    joint, b_ij, c_ij = (
        int(counts.joint_counts[i, j]),
        int(counts.past_counts[i]),
        int(counts.future_counts[j]),
    )
    standard_error = _standard_error(joint, b_ij, c_ij, total)
    if standard_error is None:
        logger.warning(
            f"Standard error undefined at lag {counts.lag}: maximizing pair "
            "has no joint hits."
        )
    return PsiEstimate(
        lag=counts.lag,
        value=float(values[i, j]),
        argmax_events=(counts.past[i], counts.future[j]),
        sample_size=total,
        standard_error=standard_error,
        pairs=int(np.count_nonzero(admissible)),
    )


def estimate_psi(
    paths: Paths,
    lag: int,
    family: EventFamily,
    anchor: int,
) -> PsiEstimate:
    """Estimate the dependence coefficient at one lag from replicated paths.

    Args:
        paths: Replicated paths; rows are independent replicas.
        lag: Lag, at least 1.
        family: Event family.
        anchor: Index of the last past coordinate.

    Returns:
        Restricted supremum of `psi`, labelled as a lower bound.

    Raises:
        trimlab.exceptions.DomainError: Paths are too short.
        trimlab.exceptions.InsufficientDataError: Too few replicas or no
            admissible event pair.
    """
    counts = event_counts(paths, lag, family, anchor)
    return psi_from_counts(counts, family.min_count)


def _count_block(
    payload: Tuple[ProcessSpec, int, int, int, List[int], EventFamily, int],
) -> List[EventCounts]:
    """Count events of one block of replicas at every lag."""
    spec, seed, block, rows, lags, family, anchor = payload
    length = anchor + max(lags) + family.depth
    paths = sample_paths(spec, length, seed, rows, key=batch_key(block))
    return [event_counts(paths, lag, family, anchor) for lag in lags]


def psi_profile(
    spec: ProcessSpec,
    lags: Sequence[int],
    family: EventFamily,
    replicas: int,
    seed: int,
    anchor: Optional[int] = None,
    block_size: int = BLOCK_SIZE,
    workers: int = 1,
    progress: bool = False,
) -> List[PsiEstimate]:
    """Estimate the dependence coefficient of a process at several lags.

    Replicas are drawn in blocks of `block_size` from the streams
    `batch_key(block)`; counts are merged in block order, so the result does
    not depend on `workers`.

    Args:
        spec: Process specification.
        lags: Lags, each at least 1.
        family: Event family.
        replicas: Number of independent replicas `M`.
        seed: Master seed.
        anchor: Index of the last past coordinate; defaults to
            `family.depth - 1`.
        block_size: Replicas per block.
        workers: Number of worker processes.
        progress: Show a progress bar.

    Returns:
        One estimate per lag, in the order of `lags`.
    """
    if not lags:
        return []
    if replicas < 1 or block_size < 1:
        raise DomainError("replicas and block_size must be positive")
    anchor = family.depth - 1 if anchor is None else anchor
    lags = list(lags)
    blocks = [
        (spec, seed, block, min(block_size, replicas - start), lags, family, anchor)
        for block, start in enumerate(range(0, replicas, block_size))
    ]
    logger.info(
        f"Counting events at lags {lags} over {replicas} replicas "
        f"in {len(blocks)} blocks."
    )
    per_block = map_ordered(
        _count_block, blocks, workers=workers, progress=progress, desc="psi"
    )
    merged = per_block[0]
    for block_counts in per_block[1:]:
        merged = [total.merge(part) for total, part in zip(merged, block_counts)]
    return [psi_from_counts(counts, family.min_count) for counts in merged]


def min_mixing_lag(
    estimates: Sequence[PsiEstimate],
    threshold: float = 1.0,
) -> MixingLagResult:
    """Return the smallest lag whose estimate falls below `threshold`.

    Args:
        estimates: Estimates at consecutive lags `1..R`.
        threshold: Threshold.

    Returns:
        Smallest such lag, or an unwitnessed result.

    Raises:
        trimlab.exceptions.DomainError: Lags are not `1..R`.
    """
    lags = [estimate.lag for estimate in estimates]
    if lags != list(range(1, len(lags) + 1)):
        raise DomainError(f"estimates must cover lags 1..R in order, got {lags}")
    for estimate in estimates:
        if estimate.value < threshold:
            return MixingLagResult(
                lag=estimate.lag,
                witnessed=True,
                threshold=threshold,
                max_lag=len(lags),
                value=estimate.value,
            )
    logger.info(f"No lag up to {len(lags)} has psi below {threshold}.")
    return MixingLagResult(threshold=threshold, max_lag=len(lags))


def exact_dyadic_psi(
    gamma: float,
    thresholds: Sequence[float],
    lag: int,
) -> PsiEstimate:
    """Return the exact supremum of `psi` over depth-1 threshold events.

    For the observable `x ** -gamma` along doubling-map orbits under Lebesgue
    measure, `{X_0 > a}` is the interval `[0, u)` with `u = a ** (-1/gamma)`,
    and `{X_lag > a'}` is the preimage of `[0, u')` under `2^lag` branches.

    Args:
        gamma: Exponent, greater than 1.
        thresholds: Thresholds, each at least 1.
        lag: Lag between 1 and `MAX_DYADIC_LAG`.

    Returns:
        Exact restricted coefficient with sample size 0.

    Raises:
        trimlab.exceptions.DomainError: Arguments are out of range.
    """
    if not gamma > 1:
        raise DomainError(f"gamma={gamma} must exceed 1")
    if not 1 <= lag <= MAX_DYADIC_LAG:
        raise DomainError(f"lag={lag} must lie in [1, {MAX_DYADIC_LAG}]")
    if not thresholds or min(thresholds) < 1:
        raise DomainError("thresholds must be non-empty and at least 1")
    branches = math.ldexp(1.0, lag)
    best = (-1.0, "", "")
    for a in thresholds:
        u = a ** (-1 / gamma)
        scaled = math.ldexp(u, lag)
        whole = math.floor(scaled)
        rest = scaled - whole
        for a_future in thresholds:
            u_future = a_future ** (-1 / gamma)
            joint = (whole * u_future + min(rest, u_future)) / branches
            value = abs(joint / (u * u_future) - 1)
            if value > best[0]:
                best = (value, f"X[0]>{a:g}", f"X[{lag}]>{a_future:g}")
    return PsiEstimate(
        lag=lag,
        value=best[0],
        argmax_events=(best[1], best[2]),
        sample_size=0,
        pairs=len(thresholds) ** 2,
    )
