"""Unit tests for interval maps and float orbits."""

from fractions import Fraction

import numpy as np
import pytest

from trimlab.exceptions import DomainError
from trimlab.processes.maps import (
    canonical_luroth_map,
    canonical_observable,
    doubling_map,
    orbit_float,
    orbits_float,
)

LUROTH = canonical_luroth_map(prefix=8)


def test_doubling_orbit_cycle():
    """Test the rational cycle of 1/5 under doubling."""
    orbit = orbit_float(doubling_map(), 0.2, 5)
    assert orbit == pytest.approx([0.2, 0.4, 0.8, 0.6, 0.2], abs=1e-12)


def test_doubling_orbit_fixed_point():
    """Test that 0 is fixed."""
    assert list(orbit_float(doubling_map(), 0.0, 3)) == [0.0, 0.0, 0.0]


def test_doubling_orbit_dyadic():
    """Test exactness on dyadic rationals with denominator `2^40`."""
    start = Fraction(0xA5A5A5A5A5, 2**40)
    expected = []
    point = start
    for _ in range(45):
        expected.append(float(point))
        point = (2 * point) % 1
    assert list(orbit_float(doubling_map(), float(start), 45)) == expected


def test_luroth_branch():
    """Test the affine branch on the first cell."""
    orbit = orbit_float(LUROTH, 0.6, 2)
    assert orbit[1] == pytest.approx(0.2)


def test_luroth_harmonic_tail():
    """Test location and image in the harmonic tail."""
    index, label = LUROTH.locate(np.array([0.01, 0.6, 0.3]))
    assert list(label) == [99, 1, 3]
    assert index[0] == -1
    image = LUROTH.apply(np.array([0.0105]))
    assert image[0] == pytest.approx(95 * 96 * (0.0105 - 1 / 96))


def test_luroth_map_cells():
    """Test the explicit prefix of the canonical map."""
    assert LUROTH.tail_start == 9
    assert LUROTH.cells[-1].label == 1
    assert LUROTH.cells[-1].slope == 2.0
    assert all(cell.is_full_branch() for cell in LUROTH.cells)


def test_canonical_observable():
    """Test the values `n^(1/alpha)` of the canonical observable."""
    observable = canonical_observable(LUROTH, 0.5)
    assert observable.values[-2:] == [4.0, 1.0]
    assert observable.tail_power == 2.0


def test_orbit_domain():
    """Test that starting points outside [0, 1) are rejected."""
    with pytest.raises(DomainError):
        orbit_float(doubling_map(), 1.0, 3)


def test_orbits_float_rows():
    """Test that batched orbits agree with single orbits."""
    starts = np.array([0.2, 0.3, 0.7])
    orbits = orbits_float(LUROTH, starts, 6)
    for row, start in zip(orbits, starts):
        assert list(row) == list(orbit_float(LUROTH, start, 6))
