"""Tail, quantile and truncated-moment evaluation."""

import logging
import math
from typing import Iterable, Union

import numpy as np
from pydantic import BaseModel  # pylint: disable=no-name-in-module
from scipy import integrate

from trimlab.exceptions import DomainError, NumericFailure
from trimlab.regvar.models import (
    LatticeDigitTail,
    RegVaryingTail,
    SlowlyVaryingSpec,
)

logger = logging.getLogger(__name__)

TailLaw = Union[RegVaryingTail, LatticeDigitTail]

QUANTILE_REL_TOL = 1e-12
QUAD_ABS_TOL = 1e-10

# digits summed term by term before switching to Euler-Maclaurin
LATTICE_EXACT_TERMS = 10**6


class TruncatedMoment(BaseModel):
    """Truncated first moment `E[X 1{X <= f}]` and its asymptotic.

    Args:
        f: Truncation level.
        exact: Exact (closed-form or quadrature) value.
        asymptotic: `alpha / (1 - alpha) * L(f) * f^(1 - alpha)`.
    """

    f: float
    exact: float
    asymptotic: float

    @property
    def ratio(self) -> float:
        """Exact over asymptotic value."""
        return self.exact / self.asymptotic


def tail(law: TailLaw, x: float) -> float:
    """Return `P(X > x)`.

    Args:
        law: Tail law.
        x: Evaluation point; must not lie left of the support.

    Returns:
        `min(1, L(x) x^-alpha)` for regularly varying tails, and
        `1 / (floor(x^alpha) + 1)` for the lattice digit law.

    Raises:
        trimlab.exceptions.DomainError: `x` lies left of the support.
    """
    if isinstance(law, LatticeDigitTail):
        if x < 0:
            raise DomainError(f"x={x} is negative")
        return 1.0 / (math.floor(x**law.alpha) + 1)
    if not x >= law.support_left:
        raise DomainError(f"x={x} lies left of the support edge {law.support_left}")
    if x == 0:
        return 1.0
    return min(1.0, law.L.evaluate(x) * x ** (-law.alpha))


def tail_array(law: TailLaw, x: np.ndarray) -> np.ndarray:
    """Vectorised `tail()` without domain checks."""
    x = np.asarray(x, dtype=float)
    if isinstance(law, LatticeDigitTail):
        return 1.0 / (np.floor(x**law.alpha) + 1)
    with np.errstate(divide="ignore"):
        log_x = np.log(x)
    log_tail = law.L.log_evaluate_array(log_x) - law.alpha * log_x
    return np.minimum(1.0, np.exp(np.minimum(log_tail, 0.0)))


def quantile(law: TailLaw, u: float, rel_tol: float = QUANTILE_REL_TOL) -> float:
    """Return the generalized inverse `inf{x : F(x) >= u}`.

    Constant slowly varying parts are inverted in closed form; other families
    are bisected in `log x` down to relative width `rel_tol`, returning the
    right end of the final bracket so that `F(F^<-(u)) >= u` holds.

    Args:
        law: Tail law.
        u: Probability in [0, 1).
        rel_tol: Relative tolerance of the bisection.

    Returns:
        Quantile of `u`.

    Raises:
        trimlab.exceptions.DomainError: `u` lies outside [0, 1).
    """
    if not 0 <= u < 1:
        raise DomainError(f"u={u} lies outside [0,1)")
    return tail_quantile(law, 1.0 - u, rel_tol)


def tail_quantile(
    law: TailLaw,
    level: float,
    rel_tol: float = QUANTILE_REL_TOL,
) -> float:
    """Return `inf{x : P(X > x) <= level}`, i.e. the quantile of `1 - level`.

    Takes the tail level directly, so small levels keep full precision.

    Raises:
        trimlab.exceptions.DomainError: `level` lies outside (0, 1].
        trimlab.exceptions.NumericFailure: The quantile exceeds double range.
    """
    if not 0 < level <= 1:
        raise DomainError(f"tail level {level} lies outside (0,1]")
    if isinstance(law, LatticeDigitTail):
        digit = max(1, math.ceil(1.0 / level) - 1)
        return float(digit) ** (1 / law.alpha)
    if tail(law, law.support_left) <= level:
        return law.support_left
    if law.L.is_constant():
        c = law.L.evaluate(1.0)
        return max(law.support_left, (c / level) ** (1 / law.alpha))
    log_level = math.log(level)
    low = math.log(law.support_left)
    step = 1.0
    high = low + step
    while law.log_tail_unclamped(high) > log_level:
        low = high
        step *= 2
        high = low + step
        if high > 700:
            raise NumericFailure(f"quantile of tail level {level} is out of range")
    while high - low > rel_tol:
        middle = 0.5 * (low + high)
        if middle in (low, high):
            break
        if law.log_tail_unclamped(middle) > log_level:
            low = middle
        else:
            high = middle
    return math.exp(high)


def quantile_array(
    law: TailLaw,
    u: np.ndarray,
    rel_tol: float = QUANTILE_REL_TOL,
) -> np.ndarray:
    """Vectorised `quantile()` for `u` in [0, 1); no domain checks."""
    u = np.asarray(u, dtype=float)
    if isinstance(law, LatticeDigitTail):
        digits = np.maximum(1.0, np.ceil(1.0 / (1.0 - u)) - 1)
        return digits ** (1 / law.alpha)
    level = 1.0 - u
    result = np.empty_like(u)
    at_edge = level >= tail(law, law.support_left)
    result[at_edge] = law.support_left
    inner = ~at_edge
    if not np.any(inner):
        return result
    if law.L.is_constant():
        c = law.L.evaluate(1.0)
        result[inner] = np.maximum(
            law.support_left, (c / level[inner]) ** (1 / law.alpha)
        )
        return result
    log_level = np.log(level[inner])
    low = np.full(log_level.shape, math.log(law.support_left))
    high = low + 1.0
    step = np.ones_like(low)
    pending = law.L.log_evaluate_array(high) - law.alpha * high > log_level
    while np.any(pending):
        low = np.where(pending, high, low)
        step = np.where(pending, 2 * step, step)
        high = np.where(pending, low + step, high)
        if np.any(high > 700):
            raise NumericFailure("quantile out of floating range")
        pending = law.L.log_evaluate_array(high) - law.alpha * high > log_level
    width = float(np.max(high - low))
    for _ in range(max(0, math.ceil(math.log2(width / rel_tol)))):
        middle = 0.5 * (low + high)
        above = law.L.log_evaluate_array(middle) - law.alpha * middle > log_level
        low = np.where(above, middle, low)
        high = np.where(above, high, middle)
    result[inner] = np.exp(high)
    return result


def _lattice_truncated_moment(law: LatticeDigitTail, f: float) -> TruncatedMoment:
    """Truncated moment of `d ** (1/alpha)` under `P(d) = 1 / (d (d + 1))`."""
    if not f >= 0:
        raise DomainError(f"f={f} is negative")
    power = 1 / law.alpha
    asymptotic = law.alpha / (1 - law.alpha) * f ** (1 - law.alpha)
    top = math.floor(f**law.alpha)
    while (top + 1) ** power <= f:
        top += 1
    while top >= 1 and top**power > f:
        top -= 1
    if top < 1:
        return TruncatedMoment(f=f, exact=0.0, asymptotic=asymptotic)

    def term(d):
        return d ** (power - 1) / (d + 1)

    exact_top = min(top, LATTICE_EXACT_TERMS)
    digits = np.arange(1, exact_top + 1, dtype=float)
    total = math.fsum(term(digits).tolist())
    if top > exact_top:
        start = float(exact_top + 1)

        def slope(d):
            return ((power - 1) * d ** (power - 2) * (d + 1) - d ** (power - 1)) / (
                d + 1
            ) ** 2

        integral, _ = integrate.quad(
            lambda log_d: term(math.exp(log_d)) * math.exp(log_d),
            math.log(start),
            math.log(top),
            epsrel=1e-13,
            limit=200,
        )
        total += (
            integral
            + (term(start) + term(float(top))) / 2
            + (slope(float(top)) - slope(start)) / 12
        )
    return TruncatedMoment(f=f, exact=total, asymptotic=asymptotic)


def truncated_first_moment(
    law: TailLaw,
    f: float,
    abs_tol: float = QUAD_ABS_TOL,
) -> TruncatedMoment:
    """Return `E[X 1{X <= f}]` together with its large-`f` asymptotic.

    Uses `E[X 1{X <= f}] = s - f P(X > f) + int_s^f P(X > x) dx` with `s`
    the support edge, in closed form for constant slowly varying parts and by
    adaptive quadrature in `log x` otherwise.

    Args:
        law: Tail law; the lattice digit law is summed digit by digit.
        f: Truncation level, not left of the support.
        abs_tol: Absolute tolerance of the quadrature.

    Returns:
        Exact and asymptotic truncated first moment.

    Raises:
        trimlab.exceptions.DomainError: `f` lies left of the support.
        trimlab.exceptions.NumericFailure: Quadrature did not reach tolerance.
    """
    if isinstance(law, LatticeDigitTail):
        return _lattice_truncated_moment(law, f)
    if not f >= law.support_left:
        raise DomainError(f"f={f} lies left of the support edge {law.support_left}")
    alpha = law.alpha
    support = law.support_left
    asymptotic = alpha / (1 - alpha) * law.L.evaluate(f) * f ** (1 - alpha)
    if law.L.is_constant():
        c = law.L.evaluate(1.0)
        if c == 1.0 and support == 1.0:
            exact = alpha / (1 - alpha) * (f ** (1 - alpha) - 1)
        else:
            exact = (
                support
                - c * f ** (1 - alpha)
                + c * (f ** (1 - alpha) - support ** (1 - alpha)) / (1 - alpha)
            )
        return TruncatedMoment(f=f, exact=exact, asymptotic=asymptotic)
    if f == support:
        exact = support * (1 - tail(law, support))
        return TruncatedMoment(f=f, exact=exact, asymptotic=asymptotic)
    integral, error = integrate.quad(
        lambda log_x: tail_array(law, np.exp(log_x)) * math.exp(log_x),
        math.log(support),
        math.log(f),
        epsabs=abs_tol,
        epsrel=1e-12,
        limit=200,
    )
    if error > max(abs_tol, 1e-9 * abs(integral)):
        logger.warning(f"Quadrature error estimate {error} at f={f}.")
    exact = support - f * tail(law, f) + integral
    if not math.isfinite(exact):
        raise NumericFailure(f"truncated moment at f={f} is not finite")
    return TruncatedMoment(f=f, exact=exact, asymptotic=asymptotic)


def slow_variation_profile(
    slowly: SlowlyVaryingSpec,
    c: float,
    exponents: Iterable[int],
) -> np.ndarray:
    """Return the ratios `L(c x) / L(x)` along `x = 10^k`.

    Args:
        slowly: Slowly varying function.
        c: Scale factor.
        exponents: Decimal exponents `k`.

    Returns:
        Array of ratios, one per exponent; tends to 1 for slowly varying `L`.
    """
    log_x = np.array([k * math.log(10) for k in exponents], dtype=float)
    return np.exp(
        slowly.log_evaluate_array(log_x + math.log(c))
        - slowly.log_evaluate_array(log_x)
    )
