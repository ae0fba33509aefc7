"""Tail-index diagnostics for samples of trimmed sums."""

import logging
import math
from typing import Tuple

import numpy as np

from trimlab.exceptions import DegenerateSampleError, DomainError
from trimlab.utils.seeds import bootstrap_key, generator

logger = logging.getLogger(__name__)


def default_k(size: int, exponent: float = 0.6) -> int:
    """Return the number of order statistics `ceil(size ** exponent)`.

    The result is clipped to `[2, size - 1]`.
    """
    return min(max(2, math.ceil(size**exponent)), size - 1)


def _hill_from_top(top: np.ndarray) -> float:
    """Hill index from the `k + 1` largest values in descending order."""
    reference = top[-1]
    if not reference > 0:
        raise DegenerateSampleError("the (k+1)-th largest value is not positive")
    mean_log = float(np.mean(np.log(top[:-1] / reference)))
    if mean_log == 0:
        raise DegenerateSampleError("the top order statistics are all equal")
    return 1.0 / mean_log


def _top(values: np.ndarray, k: int) -> np.ndarray:
    """Largest `k + 1` values in descending order."""
    top = np.partition(values, values.size - k - 1)[values.size - k - 1 :]
    return np.sort(top)[::-1]


def hill_estimator(values, k: int) -> float:
    """Return the Hill estimate of the tail index.

    `(1/k sum_{i<=k} log(x_(i) / x_(k+1)))^-1` with `x_(1) >= x_(2) >= ...`.

    Args:
        values: Positive sample.
        k: Number of upper order statistics, `2 <= k < len(values)`.

    Returns:
        Tail index estimate.

    Raises:
        trimlab.exceptions.DomainError: `k` is out of range or a value is
            not positive.
        trimlab.exceptions.DegenerateSampleError: `x_(k+1)` is 0 or the top
            values are all equal.
    """
    values = np.asarray(values, dtype=float)
    if not 2 <= k < values.size:
        raise DomainError(f"k={k} must satisfy 2 <= k < {values.size}")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise DomainError("values must be positive and finite")
    return _hill_from_top(_top(values, k))


def hill_bootstrap_ci(
    values,
    k: int,
    resamples: int = 500,
    confidence: float = 0.95,
    seed: int = 0,
) -> Tuple[float, float]:
    """Return a percentile bootstrap interval of the Hill index.

    Resamples are drawn with replacement from the stream `bootstrap_key()`
    below `seed`; resamples whose top values are degenerate are dropped.

    Args:
        values: Positive sample.
        k: Number of upper order statistics.
        resamples: Number of bootstrap resamples.
        confidence: Two-sided confidence level in (0, 1).
        seed: Master seed.

    Returns:
        Lower and upper interval bounds.

    Raises:
        trimlab.exceptions.DomainError: Arguments are out of range.
        trimlab.exceptions.DegenerateSampleError: No resample was usable.
    """
    values = np.asarray(values, dtype=float)
    hill_estimator(values, k)
    if resamples < 1 or not 0 < confidence < 1:
        raise DomainError("resamples must be positive and confidence in (0,1)")
    rng = generator(seed, bootstrap_key())
    estimates = []
    for _ in range(resamples):
        sample = values[rng.integers(0, values.size, size=values.size)]
        try:
            estimates.append(_hill_from_top(_top(sample, k)))
        except DegenerateSampleError:
            continue
    if not estimates:
        raise DegenerateSampleError("every bootstrap resample was degenerate")
    if len(estimates) < resamples:
        logger.warning(
            f"Dropped {resamples - len(estimates)} degenerate bootstrap resamples."
        )
    tail = (1 - confidence) / 2
    low, high = np.quantile(estimates, [tail, 1 - tail])
    return float(low), float(high)


def exceedance_minorant(gamma: float, b: int, omega: float) -> Tuple[float, float]:
    """Return the exceedance threshold and integral minorant at level `omega`.

    For the observable `x ** -gamma` along doubling-map orbits, the trimmed sum
    exceeds `(omega 2^-b) ** -gamma` with probability bounded below in terms
    of `omega`, which yields the lower bound `omega ** (1 - gamma) 2^-b` of
    its mean. The bound is unbounded as `omega -> 0`.

    Args:
        gamma: Exponent, greater than 1.
        b: Trimming count.
        omega: Level in (0, 1].

    Returns:
        Threshold and minorant.
    """
    if not gamma > 1 or b < 0 or not 0 < omega <= 1:
        raise DomainError("need gamma > 1, b >= 0 and omega in (0,1]")
    threshold = math.ldexp(omega, -b) ** -gamma
    minorant = math.ldexp(omega ** (1 - gamma), -b)
    return threshold, minorant
