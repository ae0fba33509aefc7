"""Unit tests for tail-index diagnostics."""

import math

import numpy as np
import pytest

from trimlab.exceptions import DegenerateSampleError, DomainError
from trimlab.experiments.tail_index import (
    default_k,
    hill_bootstrap_ci,
    hill_estimator,
    exceedance_minorant,
)

SEED = 7
GRID_SIZE = 10**4
QUANTILE_GRID = (np.arange(1, GRID_SIZE + 1) / GRID_SIZE) ** -2.0


def test_hill_estimator_hand_computation():
    """Test the estimator on two upper order statistics."""
    values = [1.0, math.e, 0.5, math.e**2, 0.2]
    assert hill_estimator(values, 2) == pytest.approx(1 / 1.5)


def test_hill_estimator_quantile_grid():
    """Test the estimator on a deterministic Pareto quantile grid."""
    assert hill_estimator(QUANTILE_GRID, 100) == pytest.approx(0.5, abs=0.02)


def test_hill_estimator_equal_values():
    """Test that equal values are degenerate."""
    with pytest.raises(DegenerateSampleError):
        hill_estimator(np.full(10, 3.0), 4)


@pytest.mark.parametrize("k", [1, 5])
def test_hill_estimator_k_out_of_range(k):
    """Test that `k` must satisfy `2 <= k < len(values)`."""
    with pytest.raises(DomainError):
        hill_estimator([1.0, 2.0, 3.0, 4.0, 5.0], k)


def test_hill_estimator_non_positive():
    """Test that non-positive values are rejected."""
    with pytest.raises(DomainError):
        hill_estimator([1.0, 2.0, 0.0, 4.0], 2)


def test_hill_bootstrap_ci_covers_index():
    """Test that the interval covers the index of a Pareto sample."""
    rng = np.random.default_rng(SEED)
    values = rng.pareto(0.5, size=20000) + 1
    low, high = hill_bootstrap_ci(
        values, 500, resamples=200, confidence=0.999, seed=SEED
    )
    assert low < hill_estimator(values, 500) < high
    assert low < 0.5 < high


def test_hill_bootstrap_ci_deterministic():
    """Test that the interval depends only on the seed."""
    first = hill_bootstrap_ci(QUANTILE_GRID, 100, resamples=50, seed=SEED)
    second = hill_bootstrap_ci(QUANTILE_GRID, 100, resamples=50, seed=SEED)
    assert first == second


def test_hill_bootstrap_ci_invalid_confidence():
    """Test that the confidence level must lie in (0, 1)."""
    with pytest.raises(DomainError):
        hill_bootstrap_ci(QUANTILE_GRID, 100, confidence=1.0)


def test_default_k():
    """Test the default number of order statistics."""
    assert default_k(1000) == 64
    assert default_k(10) == 4
    assert default_k(3) == 2


def test_exceedance_minorant():
    """Test the exceedance threshold and integral minorant."""
    threshold, minorant = exceedance_minorant(2.0, 3, 0.1)
    assert threshold == pytest.approx(6400.0)
    assert minorant == pytest.approx(1.25)


def test_exceedance_minorant_grows_as_omega_shrinks():
    """Test that the minorant is unbounded for small levels."""
    minorants = [exceedance_minorant(2.0, 8, omega)[1] for omega in (0.5, 0.05, 0.005)]
    assert minorants == sorted(minorants)
    assert minorants[-1] == pytest.approx(100 * minorants[0])


def test_exceedance_minorant_invalid():
    """Test argument checks of the minorant."""
    with pytest.raises(DomainError):
        exceedance_minorant(1.0, 3, 0.1)
    with pytest.raises(DomainError):
        exceedance_minorant(2.0, 3, 0.0)
