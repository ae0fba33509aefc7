"""Unit tests for de Bruijn conjugates."""

import math

import pytest

from trimlab.exceptions import ConvergenceError, DomainError
from trimlab.regvar.conjugates import debruijn_conjugate, debruijn_conjugate_log
from trimlab.regvar.models import ConstantL, LogPowerL, PowerOfL


def test_constant_conjugate():
    """Test the exact conjugate of constants."""
    assert debruijn_conjugate(ConstantL(c=4.0), 1e6).value == 0.25
    result = debruijn_conjugate(ConstantL(c=1.0), 12345.0)
    assert result.value == 1.0
    assert result.residual == 0.0
    assert result.iterations == 0


def test_power_of_constant_conjugate():
    """Test that the conjugate of `c^(-1/alpha)` is `c^(1/alpha)`."""
    slowly = PowerOfL(base=ConstantL(c=4.0), exponent=-2.0)
    assert debruijn_conjugate(slowly, 1e8).value == pytest.approx(16.0)


@pytest.mark.parametrize("beta", [1.0, -1.0])
def test_log_power_residual(beta):
    """Test both defining identities at `x = 10^8`."""
    result = debruijn_conjugate(LogPowerL(beta=beta), 1e8)
    assert result.residual <= 1e-3
    assert result.dual_residual <= 1e-10


def test_log_power_self_consistent():
    """Test that the conjugate of `log` solves `t = 1 / log(x t)`."""
    x = 1e8
    value = debruijn_conjugate(LogPowerL(beta=1.0), x).value
    assert value == pytest.approx(1 / math.log(x * value), rel=1e-10)


def test_log_space_far_argument():
    """Test evaluation far beyond the floating-point range."""
    log_value, iterations = debruijn_conjugate_log(LogPowerL(beta=1.0), 1e5)
    assert log_value == pytest.approx(-math.log(1e5 + log_value), rel=1e-10)
    assert iterations > 0


def test_below_x_min():
    """Test that points below `x_min` are rejected."""
    with pytest.raises(DomainError):
        debruijn_conjugate(LogPowerL(beta=1.0), 5.0)
    debruijn_conjugate(LogPowerL(beta=1.0), 5.0, x_min=2.0)


def test_non_positive_tolerance():
    """Test that a non-positive tolerance is rejected."""
    with pytest.raises(DomainError):
        debruijn_conjugate(LogPowerL(beta=1.0), 1e3, tol=0.0)


def test_no_convergence():
    """Test the error raised when the iteration cap is hit."""
    with pytest.raises(ConvergenceError) as exc_info:
        debruijn_conjugate(LogPowerL(beta=1.0), 1e8, max_iter=1)
    assert exc_info.value.last_iterate == pytest.approx(1 / math.log(1e8))
    assert exc_info.value.residual > 0
