"""Generators of stationary observable processes.

Every generator draws from the stream `(seed, *key)` of
`trimlab.utils.seeds`, so a path depends only on `(spec, n, seed, key)`.
Batches draw all their replicas from one stream; rows are replicas.
"""

import logging
import math
from typing import Optional

import numpy as np

from trimlab.exceptions import DomainError, NumericFailure, PrecisionOverflowError
from trimlab.processes.models import (
    DoublingPareto,
    FloatOrbit,
    IidRegVarying,
    LurothStep,
    ProcessSpec,
    SamplePath,
)
from trimlab.regvar.calculus import quantile_array
from trimlab.utils.seeds import SeedKey, generator

logger = logging.getLogger(__name__)

# bytes gathered per window; 9 bytes cover 64 bits at any bit offset
_WINDOW_BYTES = 9
_WINDOW_CAP = 64


def luroth_digits(uniforms: np.ndarray) -> np.ndarray:
    """Map uniforms on [0, 1) to digits with `P(d = n) = 1 / (n (n + 1))`.

    Uses `d = floor(1 / (1 - u))`, so that `P(d >= n) = 1 / n`.
    """
    return np.floor(1.0 / (1.0 - np.asarray(uniforms, dtype=float)))


def luroth_values(digits: np.ndarray, alpha: float) -> np.ndarray:
    """Return the step observable `d ** (1/alpha)` of Lueroth digits.

    Args:
        digits: Positive digits.
        alpha: Tail index in (0, 1).

    Returns:
        Observable values.

    Raises:
        trimlab.exceptions.NumericFailure: A value overflows double precision.
    """
    values = np.asarray(digits, dtype=float) ** (1.0 / alpha)
    if not np.all(np.isfinite(values)):
        raise NumericFailure(f"digit observable overflows for alpha={alpha}")
    return values


def doubling_values_from_bits(
    bits: np.ndarray,
    n: int,
    gamma: float,
    window_bits: int = 64,
    max_window_bits: int = 512,
    replica_offset: int = 0,
) -> np.ndarray:
    """Evaluate `x_k ** -gamma` on points given by their binary expansions.

    Point `x_k` (0-based `k`) is `0.b_k b_(k+1) ...`. Its leading zeros fix
    the binary exponent exactly; the mantissa is read from the
    `min(window_bits, 64)` bits that start at the first 1-bit. Bits beyond
    the supplied array are taken as zeros.

    Args:
        bits: Array of 0/1 entries, one row per replica (1-D for one path).
        n: Number of values per row.
        gamma: Exponent, greater than 1.
        window_bits: Bits read from the first 1-bit on.
        max_window_bits: Leading zeros tolerated before overflow.
        replica_offset: Added to the row index in error context.

    Returns:
        Values with the shape of `bits[..., :n]`.

    Raises:
        trimlab.exceptions.PrecisionOverflowError: A point has at least
            `max_window_bits` leading zeros, or its value exceeds double range.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    flat = bits.ndim == 1
    bits = np.atleast_2d(bits)
    length = _padded_length(n, max_window_bits)
    if bits.shape[1] < length:
        bits = np.pad(bits, ((0, 0), (0, length - bits.shape[1])))
    packed = np.packbits(bits[:, :length], axis=1)
    values = _doubling_from_packed(
        packed, n, gamma, window_bits, max_window_bits, replica_offset
    )
    return values[0] if flat else values


def _padded_length(n: int, max_window_bits: int) -> int:
    """Bits needed for `n` values, rounded up to whole bytes."""
    length = n + max_window_bits + 8 * _WINDOW_BYTES
    return 8 * math.ceil(length / 8)


def _doubling_from_packed(
    packed: np.ndarray,
    n: int,
    gamma: float,
    window_bits: int,
    max_window_bits: int,
    replica_offset: int,
) -> np.ndarray:
    """Core of `doubling_values_from_bits()` on packed bytes (rows = replicas)."""
    rows, nbytes = packed.shape
    length = 8 * nbytes
    bits = np.unpackbits(packed, axis=1)
    index_type = np.int32 if length < 2**31 else np.int64
    positions = np.arange(length, dtype=index_type)
    ones = np.where(bits == 1, positions, length)
    next_one = np.minimum.accumulate(ones[:, ::-1], axis=1)[:, ::-1][:, :n]
    zeros = next_one - positions[:n]
    overflow = zeros >= max_window_bits
    if np.any(overflow):
        row, index = (int(i) for i in np.argwhere(overflow)[0])
        raise PrecisionOverflowError(
            f"{max_window_bits} leading zeros in the binary expansion",
            index=index,
            replica=replica_offset + row,
        )
    first_byte = next_one // 8
    shift = (next_one % 8).astype(np.uint64)
    gathered = np.take_along_axis(
        packed,
        (first_byte[:, :, None] + np.arange(_WINDOW_BYTES)).reshape(rows, -1),
        axis=1,
    ).reshape(rows, n, _WINDOW_BYTES).astype(np.uint64)
    word = np.zeros((rows, n), dtype=np.uint64)
    for i in range(_WINDOW_BYTES - 1):
        word |= gathered[:, :, i] << np.uint64(8 * (7 - i))
    window = (word << shift) | (gathered[:, :, -1] >> (np.uint64(8) - shift))
    effective = min(window_bits, _WINDOW_CAP)
    if effective < _WINDOW_CAP:
        drop = np.uint64(_WINDOW_CAP - effective)
        window = (window >> drop) << drop
    log2_x = np.log2(window.astype(float)) - _WINDOW_CAP - zeros
    exponent = -gamma * log2_x
    if np.any(exponent >= 1024):
        row, index = (int(i) for i in np.argwhere(exponent >= 1024)[0])
        raise PrecisionOverflowError(
            "value exceeds double range",
            index=index,
            replica=replica_offset + row,
        )
    return np.exp2(exponent)


def _random_packed(
    rng: np.random.Generator,
    rows: int,
    n: int,
    spec: DoublingPareto,
) -> np.ndarray:
    """Draw i.i.d. fair bits as packed bytes."""
    nbytes = _padded_length(n, spec.max_window_bits) // 8
    return rng.integers(0, 256, size=(rows, nbytes), dtype=np.uint8)


def _generate(
    spec: ProcessSpec,
    n: int,
    rng: np.random.Generator,
    rows: int,
    replica_offset: int = 0,
) -> np.ndarray:
    """Draw a `(rows, n)` array of values."""
    if isinstance(spec, IidRegVarying):
        return quantile_array(spec.tail, rng.random((rows, n)))
    if isinstance(spec, LurothStep):
        return luroth_values(luroth_digits(rng.random((rows, n))), spec.alpha)
    if isinstance(spec, DoublingPareto):
        return _doubling_from_packed(
            _random_packed(rng, rows, n, spec),
            n,
            spec.gamma,
            spec.window_bits,
            spec.max_window_bits,
            replica_offset,
        )
    if isinstance(spec, FloatOrbit):
        point = rng.random(rows)
        for _ in range(spec.burn_in):
            point = spec.map.apply(point)
        values = np.empty((rows, n), dtype=float)
        for step in range(n):
            index, label = spec.map.locate(point)
            values[:, step] = spec.observable.evaluate(index, label)
            point = spec.map.apply(point)
        return values
    raise DomainError(f"unsupported process: {type(spec).__name__}")


def sample_path(
    spec: ProcessSpec,
    n: int,
    seed: int,
    key: SeedKey = (),
    replica: Optional[int] = None,
) -> SamplePath:
    """Generate the first `n` values of a process.

    Args:
        spec: Process specification.
        n: Path length.
        seed: Master seed.
        key: Stream key below the master seed.
        replica: Replica index reported in error context.

    Returns:
        Sample path.

    Raises:
        trimlab.exceptions.DomainError: `n < 1`.
        trimlab.exceptions.PrecisionOverflowError: See
            `doubling_values_from_bits()`.
    """
    if n < 1:
        raise DomainError("path length must be at least 1")
    rng = generator(seed, key)
    values = _generate(spec, n, rng, 1, replica or 0)[0]
    logger.debug(f"Generated {n} values of '{spec.kind}' on stream {key}.")
    return SamplePath(values=values, seed=seed, stream=key, spec=spec)


def sample_paths(
    spec: ProcessSpec,
    n: int,
    seed: int,
    count: int,
    key: SeedKey = (),
) -> np.ndarray:
    """Generate `count` independent paths from a single stream.

    Args:
        spec: Process specification.
        n: Path length.
        seed: Master seed.
        count: Number of replicas.
        key: Stream key below the master seed.

    Returns:
        Array of shape `(count, n)`; rows are replicas.
    """
    if n < 1 or count < 1:
        raise DomainError("path length and replica count must be positive")
    return _generate(spec, n, generator(seed, key), count)
