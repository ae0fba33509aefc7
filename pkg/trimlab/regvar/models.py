"""Models for slowly varying functions and regularly varying tails."""

import math
import re
from typing import Literal, Tuple, Union

import numpy as np
from pydantic import (  # pylint: disable=no-name-in-module
    BaseModel,
    root_validator,
    validator,
)

# pragma pylint: disable=too-few-public-methods

# grid used to check tail bounds and monotonicity at construction
_CHECK_POINTS = 2000


class _SlowlyVarying(BaseModel):
    """Base class for slowly varying families.

    Every family reduces to the normal form `c * max(log x, 1) ** beta`; the
    pair `(log c, beta)` is returned by `normal_form()`.
    """

    class Config:
        """Model configuration."""

        allow_mutation = False

    def normal_form(self) -> Tuple[float, float]:
        """Return `(log c, beta)` of the normal form."""
        raise NotImplementedError

    def log_evaluate(self, log_x: float) -> float:
        """Evaluate `log L(x)` given `log x`."""
        log_c, beta = self.normal_form()
        if beta == 0:
            return log_c
        return log_c + beta * math.log(max(log_x, 1.0))

    def log_evaluate_array(self, log_x: np.ndarray) -> np.ndarray:
        """Vectorised `log_evaluate()`."""
        log_c, beta = self.normal_form()
        if beta == 0:
            return np.full(np.shape(log_x), log_c, dtype=float)
        return log_c + beta * np.log(np.maximum(log_x, 1.0))

    def evaluate(self, x: float) -> float:
        """Evaluate `L(x)`; positive for all `x > 0`."""
        log_x = math.log(x) if x > 0 else -math.inf
        return math.exp(self.log_evaluate(log_x))

    def is_constant(self) -> bool:
        """Whether the function is constant."""
        return self.normal_form()[1] == 0

    def spec_string(self) -> str:
        """Canonical command-line representation."""
        raise NotImplementedError


class ConstantL(_SlowlyVarying):
    """Constant slowly varying function `L(x) = c`.

    Args:
        c: Positive constant.
    """

    family: Literal["constant"] = "constant"
    c: float = 1.0

    @validator("c")
    def c_positive(cls, value: float) -> float:  # pylint: disable=no-self-argument
        """Ensure that the constant is positive and finite."""
        if not value > 0 or not math.isfinite(value):
            raise ValueError("constant must be positive and finite")
        return value

    def normal_form(self) -> Tuple[float, float]:
        return math.log(self.c), 0.0

    def evaluate(self, x: float) -> float:
        return self.c

    def spec_string(self) -> str:
        return f"const:{self.c!r}"


class LogPowerL(_SlowlyVarying):
    """Logarithmic power `L(x) = max(log x, 1) ** beta`.

    Args:
        beta: Real exponent.
    """

    family: Literal["log_power"] = "log_power"
    beta: float

    def normal_form(self) -> Tuple[float, float]:
        return 0.0, self.beta

    def evaluate(self, x: float) -> float:
        log_x = math.log(x) if x > 0 else -math.inf
        return max(log_x, 1.0) ** self.beta

    def spec_string(self) -> str:
        return f"logpow:{self.beta!r}"


class PowerOfL(_SlowlyVarying):
    """Power of a slowly varying function, `L(x) = base(x) ** exponent`.

    Args:
        base: Slowly varying function being raised to a power.
        exponent: Real exponent.
    """

    family: Literal["power"] = "power"
    base: "SlowlyVaryingSpec"
    exponent: float

    def normal_form(self) -> Tuple[float, float]:
        log_c, beta = self.base.normal_form()
        return self.exponent * log_c, self.exponent * beta

    def evaluate(self, x: float) -> float:
        return self.base.evaluate(x) ** self.exponent

    def spec_string(self) -> str:
        return f"pow({self.base.spec_string()},{self.exponent!r})"


SlowlyVaryingSpec = Union[ConstantL, LogPowerL, PowerOfL]
PowerOfL.update_forward_refs(SlowlyVaryingSpec=SlowlyVaryingSpec)

_SPEC_PATTERN = re.compile(r"^(const|logpow):([^,()]+)$")


def parse_slowly_varying(text: str) -> SlowlyVaryingSpec:
    """Parse the command-line representation of a slowly varying function.

    Accepted forms are `const:<c>`, `logpow:<beta>` and
    `pow(<spec>,<exponent>)`, nested arbitrarily.

    Args:
        text: String representation.

    Returns:
        Parsed slowly varying function.

    Raises:
        ValueError: The string is not a valid representation.
    """
    text = text.strip()
    if text.startswith("pow(") and text.endswith(")"):
        inner = text[4:-1]
        base, _, exponent = inner.rpartition(",")
        if not base:
            raise ValueError(f"invalid slowly varying function: {text}")
        return PowerOfL(base=parse_slowly_varying(base), exponent=float(exponent))
    match = _SPEC_PATTERN.match(text)
    if match is None:
        raise ValueError(f"invalid slowly varying function: {text}")
    family, value = match.groups()
    if family == "const":
        return ConstantL(c=float(value))
    return LogPowerL(beta=float(value))


class RegVaryingTail(BaseModel):
    """Regularly varying tail `1 - F(x) = L(x) * x ** -alpha`.

    Args:
        alpha: Tail index in (0, 1).
        L: Slowly varying part.
        support_left: Left edge of the support; the tail must not exceed 1
            and must be non-increasing from here on.

    Raises:
        pydantic.ValidationError: The parameters violate the constraints.
    """

    alpha: float
    L: SlowlyVaryingSpec = ConstantL()
    support_left: float = 1.0

    class Config:
        """Model configuration."""

        allow_mutation = False

    @validator("alpha")
    def alpha_in_unit_interval(  # pylint: disable=no-self-argument
        cls,
        value: float,
    ) -> float:
        """Ensure that `alpha` lies in (0, 1)."""
        if not 0 < value < 1:
            raise ValueError("alpha must be in (0,1)")
        return value

    @validator("support_left")
    def support_non_negative(  # pylint: disable=no-self-argument
        cls,
        value: float,
    ) -> float:
        """Ensure that the support edge is non-negative and finite."""
        if not value >= 0 or not math.isfinite(value):
            raise ValueError("support_left must be non-negative and finite")
        return value

    @root_validator(skip_on_failure=True)
    def tail_is_a_tail(cls, values):  # pylint: disable=no-self-argument
        """Ensure `L(x) x^-alpha <= 1` and monotonicity on the support.

        Checked on a logarithmic grid that extends past the point
        `log x = beta / alpha` beyond which the normal form is decreasing.
        """
        alpha: float = values["alpha"]
        slowly: SlowlyVaryingSpec = values["L"]
        support: float = values["support_left"]
        if support <= 0:
            raise ValueError("tail exceeds 1 near a zero support edge")
        _, beta = slowly.normal_form()
        start = math.log(support)
        stop = start + max(40.0, 4 * abs(beta) / alpha + 10)
        log_x = np.linspace(start, stop, _CHECK_POINTS)
        log_tail = slowly.log_evaluate_array(log_x) - alpha * log_x
        if np.any(log_tail > 1e-12):
            raise ValueError(
                "L(x) * x^-alpha exceeds 1 on the support; raise support_left"
            )
        if np.any(np.diff(log_tail) > 1e-12):
            raise ValueError("tail is not non-increasing on the support")
        return values

    @classmethod
    def natural(cls, alpha: float, L: SlowlyVaryingSpec) -> "RegVaryingTail":
        """Build the tail on the smallest support where it is a proper tail.

        For the normal form `c max(log x, 1)^beta x^-alpha` the log-tail is
        decreasing beyond `log x = max(0, beta / alpha)`; the support edge is
        that point, moved right to where the tail drops to 1 if needed.

        Args:
            alpha: Tail index in (0, 1).
            L: Slowly varying part.

        Returns:
            Regularly varying tail.
        """
        log_c, beta = L.normal_form()
        start = max(0.0, beta / alpha)

        def log_tail(log_x: float) -> float:
            return log_c + beta * math.log(max(log_x, 1.0)) - alpha * log_x

        if log_tail(start) > 0:
            low, high = start, start + 1.0
            while log_tail(high) > 0:
                low, high = high, 2 * high - start + 1.0
            for _ in range(200):
                middle = 0.5 * (low + high)
                if log_tail(middle) > 0:
                    low = middle
                else:
                    high = middle
            start = high
        return cls(alpha=alpha, L=L, support_left=math.exp(start))

    def log_tail_unclamped(self, log_x: float) -> float:
        """Return `log L(x) - alpha log x`."""
        return self.L.log_evaluate(log_x) - self.alpha * log_x


class LatticeDigitTail(BaseModel):
    """Exact law of `d ** (1/alpha)` with `P(d = n) = 1 / (n (n + 1))`.

    The tail equals `1 / (floor(x^alpha) + 1)`, which is regularly varying
    with index `alpha` and slowly varying part tending to 1.

    Args:
        alpha: Tail index in (0, 1).
    """

    alpha: float

    class Config:
        """Model configuration."""

        allow_mutation = False

    @validator("alpha")
    def alpha_in_unit_interval(  # pylint: disable=no-self-argument
        cls,
        value: float,
    ) -> float:
        """Ensure that `alpha` lies in (0, 1)."""
        if not 0 < value < 1:
            raise ValueError("alpha must be in (0,1)")
        return value
