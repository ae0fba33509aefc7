"""Unit tests for process generators."""

import math
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from trimlab.exceptions import DomainError, PrecisionOverflowError
from trimlab.processes.generators import (
    doubling_values_from_bits,
    luroth_digits,
    luroth_values,
    sample_path,
    sample_paths,
)
from trimlab.processes.maps import doubling_map
from trimlab.processes.models import (
    DoublingPareto,
    FloatOrbit,
    IidRegVarying,
    LurothStep,
    StepObservable,
)
from trimlab.regvar.models import RegVaryingTail

SEED = 7
PARETO = IidRegVarying(tail=RegVaryingTail(alpha=0.5))
LUROTH = LurothStep(alpha=0.5)
DOUBLING = DoublingPareto(gamma=2.0)


def test_luroth_values():
    """Test the step observable `d^(1/alpha)` on a digit stream."""
    assert list(luroth_values(np.array([1, 2, 1]), 0.5)) == [1.0, 4.0, 1.0]


def test_luroth_digits():
    """Test the inverse CDF of the digit law."""
    digits = luroth_digits(np.array([0.0, 0.49, 0.5, 0.9]))
    assert list(digits) == [1.0, 1.0, 2.0, 10.0]


def test_luroth_digit_frequencies():
    """Test digit frequencies against `1 / (d (d + 1))`."""
    size = 10**6
    digits = luroth_digits(np.random.default_rng(SEED).random(size))
    for digit in range(1, 21):
        probability = 1 / (digit * (digit + 1))
        frequency = np.count_nonzero(digits == digit) / size
        error = math.sqrt(probability * (1 - probability) / size)
        assert abs(frequency - probability) <= 4 * error


def test_doubling_exact_dyadic():
    """Test the value at the point 0.1000... in binary."""
    assert doubling_values_from_bits(np.array([1, 0, 0, 0]), 1, 2.0)[0] == 4.0


def test_doubling_leading_zeros():
    """Test values at points with leading zeros."""
    values = doubling_values_from_bits(np.array([0, 1, 1]), 3, 2.0)
    assert values == pytest.approx([0.375**-2, 0.75**-2, 4.0], rel=1e-12)


def test_doubling_window_truncation():
    """Test that bits beyond the window are ignored."""
    values = doubling_values_from_bits(
        np.array([1, 1, 1, 1]), 1, 2.0, window_bits=2, max_window_bits=8
    )
    assert values[0] == pytest.approx(0.75**-2)


def test_doubling_precision_overflow():
    """Test that too many leading zeros raise with context."""
    bits = np.zeros((2, 32), dtype=np.uint8)
    bits[0, 0] = 1
    with pytest.raises(PrecisionOverflowError) as exc_info:
        doubling_values_from_bits(bits, 1, 2.0, window_bits=8, max_window_bits=8)
    assert exc_info.value.replica == 1
    assert exc_info.value.index == 0
    assert "replica=1" in str(exc_info.value)


def test_doubling_shift_consistency():
    """Test that shifting the bit stream shifts the values."""
    bits = np.random.default_rng(SEED).integers(0, 2, size=(3, 800))
    values = doubling_values_from_bits(bits, 200, 2.0)
    shifted = doubling_values_from_bits(bits[:, 1:], 199, 2.0)
    assert np.array_equal(values[:, 1:], shifted)


def test_doubling_marginal():
    """Test `P(value > t) = t^(-1/gamma)` on independent replicas."""
    count = 10_000
    values = sample_paths(DOUBLING, 1, SEED, count)[:, 0]
    for threshold in (4.0, 16.0, 100.0):
        probability = threshold**-0.5
        frequency = np.count_nonzero(values > threshold) / count
        error = math.sqrt(probability * (1 - probability) / count)
        assert abs(frequency - probability) <= 4 * error


def test_iid_inverse_cdf():
    """Test the Pareto inverse CDF on a fixed uniform."""
    rng = MagicMock()
    rng.random.return_value = np.array([[0.99]])
    with patch("trimlab.processes.generators.generator", return_value=rng):
        path = sample_path(PARETO, 1, SEED)
    assert path.values[0] == pytest.approx(1e4, rel=1e-9)


def test_sample_path_deterministic():
    """Test that paths depend only on spec, length, seed and key."""
    for spec in (PARETO, LUROTH, DOUBLING):
        first = sample_path(spec, 500, SEED, (3,))
        second = sample_path(spec, 500, SEED, (3,))
        other = sample_path(spec, 500, SEED, (4,))
        assert np.array_equal(first.values, second.values)
        assert not np.array_equal(first.values, other.values)
        assert len(first) == 500
        assert first.stream == (3,)


def test_sample_path_support():
    """Test that values lie on the support of their laws."""
    assert np.all(sample_path(PARETO, 1000, SEED).values >= 1.0)
    luroth = sample_path(LUROTH, 1000, SEED).values
    assert np.all(np.sqrt(luroth) == np.floor(np.sqrt(luroth)))
    assert np.all(sample_path(DOUBLING, 1000, SEED).values > 1.0)


def test_sample_path_length():
    """Test that empty paths are rejected."""
    with pytest.raises(DomainError):
        sample_path(PARETO, 0, SEED)


def test_sample_paths_shape():
    """Test the batch layout; rows are replicas."""
    batch = sample_paths(LUROTH, 7, SEED, 5)
    assert batch.shape == (5, 7)
    assert not np.array_equal(batch[0], batch[1])


def test_float_orbit_path():
    """Test float orbit values of a step observable."""
    spec = FloatOrbit(
        map=doubling_map(),
        observable=StepObservable(values=[1.0, 2.0]),
        burn_in=10,
    )
    values = sample_path(spec, 50, SEED).values
    assert set(np.unique(values)) <= {1.0, 2.0}
