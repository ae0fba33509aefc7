"""Unit tests for tail, quantile and truncated-moment calculus."""

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from trimlab.exceptions import DomainError
from trimlab.regvar.calculus import (
    quantile,
    quantile_array,
    slow_variation_profile,
    tail,
    tail_array,
    tail_quantile,
    truncated_first_moment,
)
from trimlab.regvar.models import (
    ConstantL,
    LatticeDigitTail,
    LogPowerL,
    RegVaryingTail,
)

PARETO = RegVaryingTail(alpha=0.5)
PARETO_3_4 = RegVaryingTail(alpha=0.75)
LOG_TAIL = RegVaryingTail.natural(0.5, LogPowerL(beta=1.0))
LOG_TAIL_3_4 = RegVaryingTail.natural(0.75, LogPowerL(beta=1.0))
LATTICE = LatticeDigitTail(alpha=0.5)
SEED = 20240917


def test_tail_pareto():
    """Test tail evaluation for the Pareto law."""
    assert tail(PARETO, 100.0) == pytest.approx(0.1)
    assert tail(PARETO, 1.0) == 1.0


def test_tail_log_power():
    """Test tail evaluation for a log power slowly varying part."""
    assert tail(LOG_TAIL_3_4, math.exp(4)) == pytest.approx(4 * math.exp(-3))


def test_tail_left_of_support():
    """Test that points left of the support are rejected."""
    with pytest.raises(DomainError):
        tail(PARETO, 0.5)


def test_tail_lattice():
    """Test the exact tail of the lattice digit law."""
    assert tail(LATTICE, 2.0) == 0.5
    assert tail(LATTICE, 4.0) == pytest.approx(1 / 3)
    assert tail(LATTICE, 0.5) == 1.0


def test_tail_monotone():
    """Test that tails are non-increasing on a logarithmic grid."""
    for law in (PARETO, LOG_TAIL, LOG_TAIL_3_4):
        grid = np.geomspace(law.support_left, 1e12, 1000)
        assert np.all(np.diff(tail_array(law, grid)) <= 1e-15)


def test_tail_array_matches_scalar():
    """Test that the vectorised tail agrees with the scalar one."""
    grid = np.geomspace(LOG_TAIL.support_left, 1e9, 50)
    expected = [tail(LOG_TAIL, x) for x in grid]
    assert tail_array(LOG_TAIL, grid) == pytest.approx(expected, rel=1e-12)


def test_quantile_pareto():
    """Test the closed-form Pareto quantile."""
    assert quantile(PARETO, 0.99) == pytest.approx(1e4, rel=1e-9)
    assert quantile(PARETO, 0.0) == 1.0


def test_quantile_log_power():
    """Test bisection against an independent root finder."""
    value = quantile(LOG_TAIL, 0.999)
    root = optimize.brentq(
        lambda log_x: math.log(log_x) - 0.5 * log_x - math.log(1e-3),
        2.0,
        200.0,
        xtol=1e-14,
    )
    assert value == pytest.approx(math.exp(root), rel=1e-9)


@pytest.mark.parametrize("u", [-0.1, 1.0, 1.5])
def test_quantile_domain(u):
    """Test that probabilities outside [0, 1) are rejected."""
    with pytest.raises(DomainError):
        quantile(PARETO, u)


def test_quantile_lattice():
    """Test the generalized inverse of the lattice digit law."""
    assert quantile(LATTICE, 0.0) == 1.0
    assert quantile(LATTICE, 0.5) == 1.0
    assert quantile(LATTICE, 0.6) == 4.0


def test_galois_inequalities():
    """Test `F(F^<-(u)) >= u` and `F^<-(F(x)) <= x` on random points."""
    rng = np.random.default_rng(SEED)
    for law in (PARETO, LOG_TAIL):
        uniforms = rng.random(10_000)
        quantiles = quantile_array(law, uniforms)
        assert np.all(1 - tail_array(law, quantiles) >= uniforms - 1e-12)
        points = law.support_left * np.exp(rng.exponential(2.0, 10_000))
        back = quantile_array(law, 1 - tail_array(law, points))
        assert np.all(back <= points * (1 + 1e-9))


def test_quantile_array_matches_scalar():
    """Test that the vectorised quantile agrees with the scalar one."""
    uniforms = np.array([0.0, 0.1, 0.5, 0.9, 0.999, 0.999999])
    for law in (PARETO, LOG_TAIL, LATTICE):
        expected = [quantile(law, u) for u in uniforms]
        assert quantile_array(law, uniforms) == pytest.approx(expected, rel=1e-9)


def test_truncated_moment_pareto():
    """Test the closed-form truncated moment of the Pareto law."""
    moment = truncated_first_moment(PARETO, 100.0)
    assert moment.exact == pytest.approx(9.0)
    assert moment.asymptotic == pytest.approx(10.0)
    moment = truncated_first_moment(PARETO_3_4, 1e4)
    assert moment.exact == pytest.approx(27.0)
    assert moment.asymptotic == pytest.approx(30.0)


def test_truncated_moment_at_support():
    """Test that truncation at the support edge has moment 0."""
    assert truncated_first_moment(PARETO, 1.0).exact == 0.0


def test_truncated_moment_left_of_support():
    """Test that levels left of the support are rejected."""
    with pytest.raises(DomainError):
        truncated_first_moment(PARETO, 0.5)


def test_truncated_moment_ratio_monotone():
    """Test that exact over asymptotic increases toward 1 along `10^k`."""
    ratios = [truncated_first_moment(PARETO, 10.0**k).ratio for k in range(2, 7)]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(0.999)


def test_truncated_moment_scaled_constant():
    """Test the closed form for a constant other than 1."""
    law = RegVaryingTail.natural(0.5, ConstantL(c=2.0))
    f = 400.0
    assert law.support_left == pytest.approx(4.0)
    atom = law.support_left * (1 - tail(law, law.support_left))
    continuous, _ = integrate.quad(lambda x: x * x**-1.5, law.support_left, f)
    assert truncated_first_moment(law, f).exact == pytest.approx(atom + continuous)


def test_truncated_moment_quadrature():
    """Test quadrature against integration of the density."""
    law = LOG_TAIL
    support = law.support_left
    f = 1e4

    def density(x):
        return x ** (-1.5) * (0.5 * math.log(x) - 1)

    atom = support * (1 - tail(law, support))
    continuous, _ = integrate.quad(lambda x: x * density(x), support, f, limit=200)
    moment = truncated_first_moment(law, f)
    assert moment.exact == pytest.approx(atom + continuous, rel=1e-8)


def test_slow_variation_profile():
    """Test that `L(c x) / L(x)` tends to 1 along `10^k`."""
    exponents = range(1, 13)
    for c in (2.0, 10.0):
        ratios = slow_variation_profile(LogPowerL(beta=1.0), c, exponents)
        deviations = np.abs(ratios - 1)
        assert np.all(np.diff(deviations) < 0)
        assert deviations[-1] < 0.1
    constant = slow_variation_profile(ConstantL(c=3.0), 10.0, exponents)
    assert constant == pytest.approx(np.ones(12))


def test_tail_quantile_small_level():
    """Test that tail levels are inverted without cancellation."""
    assert tail_quantile(PARETO, 1e-10) == pytest.approx(1e20, rel=1e-12)
    with pytest.raises(DomainError):
        tail_quantile(PARETO, 0.0)


def test_truncated_moment_lattice():
    """Test the lattice digit law summed by hand."""
    assert truncated_first_moment(LATTICE, 4.0).exact == pytest.approx(7 / 6)
    assert truncated_first_moment(LATTICE, 0.5).exact == 0.0
    assert truncated_first_moment(LATTICE, 100.0).asymptotic == pytest.approx(10.0)


def test_truncated_moment_lattice_long_sum():
    """Test the Euler-Maclaurin tail against a direct sum."""
    digits = np.arange(1, 2 * 10**6 + 1, dtype=float)
    direct = math.fsum((digits / (digits + 1)).tolist())
    moment = truncated_first_moment(LATTICE, 4e12)
    assert moment.exact == pytest.approx(direct, rel=1e-10)
